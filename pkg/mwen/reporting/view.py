"""
Console summaries.
"""

from typing import Optional

from rich.console import Console
from rich.table import Table

from mwen.admm import DecentralizedSolution
from mwen.models import CentralSolution
from .report import ComparisonReport


def _num(value: Optional[float], fmt: str = ".4f") -> str:
    return "-" if value is None else format(value, fmt)


class ReportView:
    """Renders solve and comparison results as rich tables"""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def render_comparison(self, report: ComparisonReport) -> None:
        self.console.print(f"\n[bold cyan]Comparison: {report.scenario}[/bold cyan]\n")
        table = Table(show_header=True, header_style="bold")
        for column in ("method", "rho", "k_s", "cost $", "% diff", "final eps", "iters", "MWM kWh", "% energy", "stop"):
            table.add_column(column)
        for row in report.rows:
            if row.status != "ok":
                table.add_row(row.method, _num(row.rho, "g"), str(row.ob_window or "-"),
                              "[red]failed[/red]", "-", "-", str(row.iterations or "-"), "-", "-", row.error[:40])
                continue
            table.add_row(
                row.method,
                _num(row.rho, "g"),
                str(row.ob_window or "-"),
                _num(row.cost, ".2f"),
                _num(row.pct_diff, ".4g"),
                _num(row.final_eps, ".3e"),
                str(row.iterations if row.iterations is not None else "-"),
                _num(row.water_energy_kwh, ".3f"),
                _num(row.pct_energy_diff, ".4g"),
                row.stop_reason,
            )
        self.console.print(table)

    def render_central(self, solution: CentralSolution) -> None:
        stats = Table(show_header=False, box=None, padding=(0, 2))
        stats.add_row("Status:", f"[cyan]{solution.status}[/cyan]")
        stats.add_row("Cost:", f"[yellow]${solution.cost:,.2f}[/yellow]")
        stats.add_row("MWM energy:", f"{solution.water_energy_kwh:,.3f} kWh")
        stats.add_row("B&B nodes:", str(solution.nodes))
        stats.add_row("Backend:", solution.backend)
        self.console.print(stats)

    def render_admm(self, solution: DecentralizedSolution, central_cost: Optional[float] = None) -> None:
        stats = Table(show_header=False, box=None, padding=(0, 2))
        stats.add_row("Stop reason:", f"[cyan]{solution.stop_reason}[/cyan]")
        stats.add_row("Iterations:", str(len(solution.iterations)))
        stats.add_row("Final eps:", f"{solution.final_eps:.3e}")
        stats.add_row("Restored cost:", f"[yellow]${solution.restored_cost:,.2f}[/yellow]")
        if central_cost is not None:
            stats.add_row("Central cost:", f"${central_cost:,.2f}")
            if central_cost:
                pct = 100.0 * (solution.restored_cost - central_cost) / central_cost
                stats.add_row("% difference:", f"{pct:.4g}")
        stats.add_row("MWM energy:", f"{solution.water_energy_kwh:,.3f} kWh")
        self.console.print(stats)
