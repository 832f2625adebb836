"""Model assembly, weight container, cost model, benchmark harness and CLI."""
