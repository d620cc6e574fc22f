"""Overlapping community detection with entropy-filtered random walks."""

from .centrality import CentralityTable, centrality_delta, eigenvector_centrality
from .community import (
    Community,
    CommunityRecord,
    CommunityStore,
    extract_members,
    rank_communities,
    top_communities,
    tour_key,
)
from .detect import Detection, detect
from .entropy import EntropyReport, accept_tour, entropy_ratios, tour_entropy
from .errors import (
    ConfigurationError,
    ContractError,
    ConvergenceError,
    DomainError,
    EntropyWalkError,
    KeyUnderflowError,
    MutationError,
    ParseError,
)
from .graph import (
    Graph,
    avg_clustering,
    generate_barabasi_albert,
    generate_gnm,
    generate_ring_of_cliques,
    load_edge_list,
    load_toy_graph,
    neighbors,
    planted_cliques,
    read_edge_list,
    write_edge_list,
)
from .minhash import LshCommunityStore, lsh_bucket, minhash_signature
from .walker import RunStats, Tour, WalkParams, personalized_tours, random_tour, run_tours

__version__ = "0.1.0"
