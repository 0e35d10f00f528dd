from .main import main
from .rich_display import (
    SweepProgress,
    console,
    create_sweep_display,
    print_error_panel,
    print_lb_report,
    print_plan_table,
    print_run_summary,
    print_solution_panel,
    print_sweep_result,
    run_live_sweep,
)

__all__ = [
    "main",
    "SweepProgress",
    "console",
    "create_sweep_display",
    "print_error_panel",
    "print_lb_report",
    "print_plan_table",
    "print_run_summary",
    "print_solution_panel",
    "print_sweep_result",
    "run_live_sweep",
]
