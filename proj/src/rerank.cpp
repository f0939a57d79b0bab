#include "fairrank/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fairrank/csv.hpp"

namespace fairrank {

const std::vector<Algorithm>& all_algorithms() {
    static const std::vector<Algorithm> algorithms = {
        Algorithm::none, Algorithm::mmr,   Algorithm::mmr_tolerance, Algorithm::mmr_fairness,
        Algorithm::ofair, Algorithm::xquad, Algorithm::far,           Algorithm::pfar};
    return algorithms;
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::none: return "none";
        case Algorithm::mmr: return "mmr";
        case Algorithm::mmr_tolerance: return "mmr_tolerance";
        case Algorithm::mmr_fairness: return "mmr_fairness";
        case Algorithm::ofair: return "ofair";
        case Algorithm::xquad: return "xquad";
        case Algorithm::far: return "far";
        case Algorithm::pfar: return "pfar";
    }
    throw std::logic_error("unreachable algorithm tag");
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
    for (Algorithm a : all_algorithms())
        if (algorithm_name(a) == name) return a;
    return std::nullopt;
}

bool uses_similarity(Algorithm a) {
    return a == Algorithm::mmr || a == Algorithm::mmr_tolerance ||
           a == Algorithm::mmr_fairness || a == Algorithm::ofair;
}

bool uses_sensitive_feature(Algorithm a) {
    return a == Algorithm::far || a == Algorithm::pfar;
}

void RerankConfig::validate(const FeatureSchema& schema) const {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("rerank: lambda must be in [0, 1]");
    if (k_prime < 1)
        throw std::invalid_argument("rerank: k' must be at least 1");
    if (uses_sensitive_feature(algorithm) &&
        (sensitive_feature < 0 || sensitive_feature >= schema.feature_count()))
        throw std::invalid_argument("rerank: " + algorithm_name(algorithm) +
                                    " requires a valid sensitive feature");
}

double wcos(std::span<const double> b, std::span<const double> b_prime,
            std::span<const double> z) {
    if (b.size() != b_prime.size() || b.size() != z.size())
        throw std::invalid_argument("wcos: vector lengths differ");
    double dot = 0.0, norm_b = 0.0, norm_bp = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        dot += z[j] * b[j] * b_prime[j];
        norm_b += z[j] * b[j] * b[j];
        norm_bp += z[j] * b_prime[j] * b_prime[j];
    }
    return dot / (std::sqrt(norm_b) * std::sqrt(norm_bp));
}

RerankedList greedy_rerank(const CandidateList& candidates, const MarginalScorer& scorer,
                           int k_prime) {
    if (k_prime < 1)
        throw std::invalid_argument("greedy_rerank: k' must be at least 1");

    const int n = static_cast<int>(candidates.items.size());
    const int target = std::min(k_prime, n);

    RerankedList out;
    out.user = candidates.user;
    out.items.reserve(target);

    std::vector<bool> taken(n, false);
    std::vector<int> selected;
    selected.reserve(target);
    for (int step = 0; step < target; ++step) {
        int best_pos = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int pos = 0; pos < n; ++pos) {
            if (taken[pos]) continue;
            double s = scorer(pos, selected);
            // Strict comparison keeps the earliest (best original rank) on ties.
            if (s > best_score) {
                best_score = s;
                best_pos = pos;
            }
        }
        taken[best_pos] = true;
        selected.push_back(best_pos);
        out.items.emplace_back(candidates.items[best_pos].first, best_score);
    }
    return out;
}

double score_mmr(double rec_score, int item, std::span<const int> selected, double lambda,
                 const SimilarityFn& similarity) {
    double penalty = 0.0;
    for (int other : selected) penalty += similarity(item, other);
    return lambda * rec_score - (1.0 - lambda) * penalty;
}

double score_ofair(const ItemCatalog& catalog, double rec_score, int item,
                   std::span<const int> selected, double lambda, std::span<const double> z) {
    return score_mmr(rec_score, item, selected, lambda, [&](int a, int b) {
        return wcos(catalog.dummy(a), catalog.dummy(b), z);
    });
}

double score_xquad(const ItemCatalog& catalog, double rec_score, int item,
                   std::span<const int> selected, double lambda) {
    const auto& schema = catalog.schema();
    const Item& candidate = catalog.item(item);
    double novelty = 0.0;
    for (int j = 0; j < schema.feature_count() && novelty == 0.0; ++j) {
        for (int v : candidate.values[j]) {
            bool seen = false;
            for (int other : selected) {
                if (catalog.item(other).holds(j, v)) {
                    seen = true;
                    break;
                }
            }
            if (!seen) {
                novelty = 1.0;
                break;
            }
        }
    }
    return lambda * rec_score + (1.0 - lambda) * novelty;
}

double score_far_pfar(const ItemCatalog& catalog, double rec_score, int item,
                      std::span<const int> selected, double lambda, int sensitive_feature,
                      double t) {
    const auto& values = catalog.item(item).values[sensitive_feature];
    if (values.size() != 1)
        throw std::invalid_argument("far/pfar: item '" + catalog.item_id(item) +
                                    "' is multi-valued on the sensitive feature");
    const int own = values.front();
    double boost = 1.0;
    for (int other : selected) {
        const auto& other_values = catalog.item(other).values[sensitive_feature];
        if (other_values.size() != 1)
            throw std::invalid_argument("far/pfar: item '" + catalog.item_id(other) +
                                        "' is multi-valued on the sensitive feature");
        if (other_values.front() == own) {
            boost = 0.0;
            break;
        }
    }
    return lambda * rec_score + (1.0 - lambda) * t * boost;
}

PairSimCache::PairSimCache(const ItemCatalog& catalog, const CandidateList& candidates,
                           std::vector<double> z)
    : catalog_(catalog), candidates_(candidates), z_(std::move(z)),
      n_(static_cast<int>(candidates.items.size())) {
    if (static_cast<int>(z_.size()) != catalog.schema().dummy_size())
        throw std::invalid_argument("PairSimCache: weight length mismatch");
    cache_.assign(static_cast<std::size_t>(n_) * n_, std::numeric_limits<double>::quiet_NaN());
}

double PairSimCache::sim(int pos_a, int pos_b) {
    double& slot = cache_[static_cast<std::size_t>(pos_a) * n_ + pos_b];
    if (std::isnan(slot)) {
        double value = wcos(catalog_.dummy(candidates_.items[pos_a].first),
                            catalog_.dummy(candidates_.items[pos_b].first), z_);
        slot = value;
        cache_[static_cast<std::size_t>(pos_b) * n_ + pos_a] = value;
    }
    return slot;
}

std::vector<double> similarity_weights(Algorithm algorithm, const ToleranceProfile& profile,
                                       std::span<const double> mask) {
    switch (algorithm) {
        case Algorithm::mmr:
            return std::vector<double>(mask.size(), 1.0);
        case Algorithm::mmr_tolerance: {
            std::vector<double> uniform(mask.size(), 1.0);
            return combine_weights(profile, uniform).z;
        }
        case Algorithm::mmr_fairness:
            return std::vector<double>(mask.begin(), mask.end());
        case Algorithm::ofair:
            return combine_weights(profile, mask).z;
        default:
            throw std::invalid_argument("similarity_weights: " + algorithm_name(algorithm) +
                                        " has no similarity weighting");
    }
}

RerankedList rerank_list(const ItemCatalog& catalog, const CandidateList& candidates,
                         const RerankConfig& config, PairSimCache* sim_cache,
                         const ToleranceProfile* profile) {
    config.validate(catalog.schema());

    if (config.algorithm == Algorithm::none) {
        RerankedList out;
        out.user = candidates.user;
        out.algorithm = config.algorithm;
        out.lambda = config.lambda;
        const int target = std::min<int>(config.k_prime, candidates.items.size());
        out.items.assign(candidates.items.begin(), candidates.items.begin() + target);
        return out;
    }

    MarginalScorer scorer;
    const double lambda = config.lambda;
    if (uses_similarity(config.algorithm)) {
        if (sim_cache == nullptr)
            throw std::invalid_argument("rerank_list: similarity cache required for " +
                                        algorithm_name(config.algorithm));
        scorer = [&catalog, &candidates, sim_cache, lambda](int pos,
                                                            std::span<const int> selected) {
            double penalty = 0.0;
            for (int other : selected) penalty += sim_cache->sim(pos, other);
            return lambda * candidates.items[pos].second - (1.0 - lambda) * penalty;
        };
    } else if (config.algorithm == Algorithm::xquad) {
        scorer = [&catalog, &candidates, lambda](int pos, std::span<const int> selected) {
            std::vector<int> selected_items;
            selected_items.reserve(selected.size());
            for (int other : selected) selected_items.push_back(candidates.items[other].first);
            return score_xquad(catalog, candidates.items[pos].second,
                               candidates.items[pos].first, selected_items, lambda);
        };
    } else {
        double t = 1.0;
        if (config.algorithm == Algorithm::pfar) {
            if (profile == nullptr || profile->tau.empty())
                throw std::invalid_argument("rerank_list: pfar requires a tolerance profile");
            t = profile->tau[config.sensitive_feature];
        }
        const int feature = config.sensitive_feature;
        scorer = [&catalog, &candidates, lambda, feature, t](int pos,
                                                             std::span<const int> selected) {
            std::vector<int> selected_items;
            selected_items.reserve(selected.size());
            for (int other : selected) selected_items.push_back(candidates.items[other].first);
            return score_far_pfar(catalog, candidates.items[pos].second,
                                  candidates.items[pos].first, selected_items, lambda, feature,
                                  t);
        };
    }

    RerankedList out = greedy_rerank(candidates, scorer, config.k_prime);
    out.algorithm = config.algorithm;
    out.lambda = config.lambda;
    return out;
}

void write_reranked_csv(const std::filesystem::path& path,
                        const std::vector<RerankedList>& lists,
                        const Interactions& interactions, const ItemCatalog& catalog) {
    CsvTable table;
    table.columns = {"user_id", "rank", "item_id", "score", "algorithm", "lambda"};
    for (const auto& list : lists) {
        for (std::size_t rank = 0; rank < list.items.size(); ++rank) {
            const auto& [item, score] = list.items[rank];
            table.rows.push_back({interactions.user_id(list.user), std::to_string(rank + 1),
                                  catalog.item_id(item), format_double(score),
                                  algorithm_name(list.algorithm), format_double(list.lambda)});
        }
    }
    write_csv(path, table);
}

} // namespace fairrank
