from mcp.server.fastmcp import FastMCP


def register_prompt(mcp: FastMCP) -> None:

    @mcp.prompt(name="Review Runs",
                description="Compare prompt-learning runs and ablations")
    def review_runs() -> str:
        """
        Guide a review of the stored runs.

        Returns:
            Instructions for using the run tools
        """
        return """Review the prompt-learning runs available to you.

Using the run tools, please:

1. List every run (list_runs)
2. For each run, read the per-seed training curves (get_run_summary)
   and note whether the total loss decreases
3. Read the evaluation results (get_eval_results); for base-to-new runs
   check the harmonic mean with compute_harmonic_mean
4. Group runs that differ in one setting (loss terms, context length,
   shots, initialization) and compare them

Write a short markdown report with one table per ablation group and a
list of runs whose training did not converge."""
