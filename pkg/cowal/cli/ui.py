"""
Terminal UI Components

Rich-based UI elements for the CLI. Everything here writes to standard
error; standard output is reserved for machine-readable results.
"""

from typing import Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ..strategies import StrategyRegistry

console = Console(stderr=True)


def print_run_header(title: str, details: dict[str, object]) -> None:
    """Print a panel describing the run about to start"""
    body = "\n".join(f"[cyan]{key}:[/cyan] {value}" for key, value in details.items())
    console.print(Panel(body, title=f"[bold]{title}[/bold]", border_style="cyan"))


def print_strategies(registry: StrategyRegistry) -> None:
    """Print every registered strategy"""
    table = Table(title="Annotation strategies", border_style="cyan")
    table.add_column("Name", style="bold cyan")
    table.add_column("Category", style="magenta")
    table.add_column("Entropy", justify="center")
    table.add_column("Description", style="white")

    for name in registry.list_strategies():
        meta = registry.get(name).metadata
        table.add_row(
            meta.name,
            meta.category.value,
            "yes" if meta.needs_entropy else "",
            meta.description,
        )
    console.print(table)


def print_aualc_table(
    rows: Sequence[tuple[str, float, float | None, float | None]],
    baseline: str | None = None,
) -> None:
    """
    Print median AuALC per strategy

    Args:
        rows: (strategy, median AuALC, margin vs baseline, sign-test p-value)
        baseline: Strategy the margins are measured against
    """
    title = "AuALC (median over runs)"
    if baseline:
        title += f", margins against {baseline}"
    table = Table(title=title, border_style="cyan")
    table.add_column("Strategy", style="bold cyan")
    table.add_column("AuALC", justify="right")
    table.add_column("Margin", justify="right")
    table.add_column("p (sign test)", justify="right")

    for strategy, median, margin, p_value in rows:
        table.add_row(
            strategy,
            f"{median:.4f}",
            "" if margin is None else f"{margin:+.4f}",
            "" if p_value is None else f"{p_value:.4f}",
        )
    console.print(table)


def print_error(message: str) -> None:
    """Print error message"""
    console.print(Text.assemble(("Error:", "bold red"), f" {message}"))


def print_info(message: str) -> None:
    """Print info message"""
    console.print(Text(message, style="dim cyan"))
