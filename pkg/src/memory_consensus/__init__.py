"""Memoryless and m-memory consensus (voter-model) processes on weighted
directed graphs: exact winning probabilities via the layered memory graph,
seeded Monte Carlo simulation, and consensus-time experiments."""

from .graphs import (
    TopologySpec,
    WeightedDigraph,
    biclique,
    clique,
    cycle,
    dump_graph,
    from_edges,
    full_binary_tree,
    graph_period,
    is_strongly_connected,
    is_well_behaved,
    load_graph,
    load_graph_path,
    make_topology,
    torus_grid,
    uniform_digraph,
)
from .stationary import InfluenceVector, stationary_distribution
from .memory import (
    LayeredGraph,
    LayerWeights,
    MemoryParams,
    build_memory_graph,
    layer_weights,
    memory_graph_is_well_behaved_check,
    memory_stationary,
)
from .probability import (
    early_memory_equivalence_check,
    stack_history,
    winprob_memory,
    winprob_memoryless,
)
from .simulate import (
    MemoryProcessState,
    NeighbourSampler,
    RngSpec,
    RunRecord,
    initial_state,
    is_stable_consensus,
    random_colours,
    records_from_csv,
    records_to_csv,
    run_batch,
    run_process,
    splitmix64,
    step_memory,
)
from .experiments import (
    ExperimentSummary,
    TTestResult,
    experiment1,
    experiment2,
    summaries_from_csv,
    summaries_to_csv,
    summarize,
    welch_ttest,
)

__all__ = [name for name in dir() if not name.startswith("_")]
