"""Product-of-experts energy models over token sequences, sampled with a
single-site Gibbs/Metropolis-Hastings chain, plus the exact-enumeration
oracle that verifies the sampler."""

from .experts import (
    DiscriminatorExpert,
    EmbeddingTable,
    EnergyBreakdown,
    EnergyExpert,
    EnergyModel,
    FuzzyExpert,
    HammingExpert,
    LexiconExpert,
    MlmExpert,
    combined_energy,
    disc_energy,
    fuzzy_energy,
    hamming_energy,
    lexicon_energy,
    mlm_energy,
)
from .models import (
    NaiveBayesClassifier,
    NegLogJointExpert,
    NeighborMLM,
    TabularJoint,
    classify,
    conditional,
    fit_nb_classifier,
    fit_neighbor_mlm,
)
from .oracle import (
    ExactDistribution,
    check_detailed_balance,
    empirical_distribution,
    enumerate_distribution,
    tv_distance,
)
from .sampler import (
    ChainResult,
    PositionOrder,
    ProposalMove,
    SamplerConfig,
    StepRecord,
    accept_prob,
    epoch_states,
    init_prompted,
    init_revision,
    run_chain,
    run_ensemble,
    step,
)
from .text import (
    MASK_ID,
    MASK_TOKEN,
    UNK_ID,
    UNK_TOKEN,
    Corpus,
    Sequence,
    Vocabulary,
    build_vocab,
    detokenize,
    load_corpus,
    tokenize,
)

__version__ = "0.1.0"
