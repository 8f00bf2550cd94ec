"""Document retrieval with a term-document Markov random field, LSA and tf-idf."""

from .corpus import (
    Collection,
    QrelSet,
    RawDocument,
    RawQuery,
    TermDocumentMatrix,
    Vocabulary,
    Weighting,
    build_count_matrix,
    build_vocabulary,
    parse_qrels,
    parse_smart,
    tokenize,
)
from .linalg import SvdFactors, cosine, frobenius_norm, pseudoinverse_k, reconstruct, svd_truncated
from .lsa import LsaIndex, build_lsa_index, doc_similarity, fold_query, rank_lsa, term_similarity
from .mrf import (
    LearningInput,
    MrfConfiguration,
    MrfParameters,
    energy,
    evaluate_objective,
    gibbs_oracle,
    joint_unnormalized,
    learn_parameters,
    local_doc_probability,
    make_learning_input,
    rank_mrf,
)
from .porter import stem
from .vsm import QueryVector, RankedList, query_vector, rank_vsm, tfidf_weight

__version__ = "0.1.0"
