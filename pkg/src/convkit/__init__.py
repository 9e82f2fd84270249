"""convkit: CNN convolution algorithms with a row-wise two-stage engine,
an analytical GPU execution model, and a benchmark harness."""

from .bench import (ALGORITHMS, CSV_HEADER, VALIDATION_TOLERANCES, BenchRecord,
                    emit_report, run_bench, skip_reason)
from .configs import (BATCH_SIZES, ConvConfig, filter_dims, filter_row_reuse,
                      input_dims, output_dims, parse_config_file, preset_configs,
                      same_padding)
from .errors import (ConvKitError, FormatError, InvalidConfig, InvalidPlan,
                     InvalidShape, ParseError, ShapeMismatch, Unsupported,
                     UnsupportedFilter, WorkspaceExceeded)
from .execmodel import (CoalescingReport, DeviceModel, LaunchPlan,
                        block_position_ranges, coalescing_report, plan_launch,
                        theoretical_reuse, validate_plan)
from .reference import (Im2colMatrix, conv_gemm, conv_naive, conv_naive_f64,
                        conv_winograd_f22, gemm, im2col, relative_error)
from .tensor import (Tensor4, load_tensor, make_tensor, read_padded, save_tensor)
from .twostage import (DEFAULT_WORKSPACE_LIMIT, PartialSums, RunStats,
                       conv_twostage, stage1_scalar_prods, stage2_sum,
                       workspace_bytes)

__version__ = "0.1.0"
