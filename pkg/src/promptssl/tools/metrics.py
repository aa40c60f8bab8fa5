"""
Metric tools: harmonic mean and base-to-new aggregation.
"""
from typing import List

from promptssl.evaluation.common import EvaluationError
from promptssl.evaluation.metrics import aggregate_b2n, harmonic_mean
from promptssl.utils.formatting import format_value


def _harmonic_mean_impl(base_acc: float, new_acc: float) -> str:
    value = harmonic_mean(base_acc, new_acc)
    return (f"Harmonic mean of base {format_value(base_acc)} and new "
            f"{format_value(new_acc)}: {format_value(value)}")


def _aggregate_b2n_impl(pairs: List[List[float]]) -> str:
    if any(len(pair) != 2 for pair in pairs):
        raise EvaluationError("Every entry must be a [base, new] pair.")
    result = aggregate_b2n([(b, n) for b, n in pairs])
    return "\n".join([
        f"Mean base: {format_value(result['mean_base'])}",
        f"Mean new: {format_value(result['mean_new'])}",
        f"Mean of per-dataset HM: {format_value(result['mean_of_hm'])}",
        f"HM of mean accuracies: {format_value(result['hm_of_means'])}",
    ])


def register_tools(mcp) -> None:
    """
    Register metric tools with the MCP server.

    Args:
        mcp: The FastMCP server instance
    """

    @mcp.tool()
    def compute_harmonic_mean(base_acc: float, new_acc: float) -> str:
        """
        Computes the harmonic mean of base and new accuracy.

        Args:
            base_acc: Base-class accuracy in percent
            new_acc: New-class accuracy in percent

        Returns:
            One line with the harmonic mean to two decimals
        """
        try:
            return _harmonic_mean_impl(base_acc, new_acc)
        except EvaluationError as e:
            return f"Error: {str(e)}"

    @mcp.tool()
    def aggregate_base_to_new(pairs: List[List[float]]) -> str:
        """
        Averages base-to-new results over datasets, reporting both the
        mean of per-dataset harmonic means and the harmonic mean of the
        averaged accuracies.

        Args:
            pairs: One [base, new] accuracy pair per dataset

        Returns:
            Four labelled lines
        """
        try:
            return _aggregate_b2n_impl(pairs)
        except EvaluationError as e:
            return f"Error: {str(e)}"
