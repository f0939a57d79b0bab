#ifndef FAIRRANK_METRICS_HPP
#define FAIRRANK_METRICS_HPP

#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "fairrank/catalog.hpp"
#include "fairrank/rerank.hpp"

namespace fairrank {

// Binary-relevance nDCG at cutoff k_prime with a log2(rank + 1) discount,
// normalized by the ideal DCG for min(|relevant|, k_prime) hits. Returns 0
// when the user has no relevant items.
double ndcg_at(std::span<const int> ranked_items, const std::unordered_set<int>& relevant,
               int k_prime);

// (precision, recall) at cutoff k_prime; recall is 0 for an empty relevant
// set (such users are excluded from averages upstream).
std::pair<double, double> precision_recall_at(std::span<const int> ranked_items,
                                              const std::unordered_set<int>& relevant,
                                              int k_prime);

// Mean pairwise (1 - cosine) over epsilon-smoothed dummy vectors; 0 for
// lists shorter than 2.
double intra_list_distance(std::span<const int> items, const ItemCatalog& catalog);

// Mean over features of the Shannon entropy (bits) of the value-occurrence
// distribution within the list. Throws on an empty list.
double list_entropy(std::span<const int> items, const ItemCatalog& catalog);

// Precomputed per-item protected membership for a catalog + spec.
struct ExposureIndex {
    ExposureIndex(const ItemCatalog& catalog, const ProtectedSpec& spec);

    const ProtectedSpec& spec() const { return *spec_; }
    bool protected_item(int item) const { return protected_flags_[item] != 0; }
    bool holds_entry(int item, int entry) const { return entry_flags_[entry][item] != 0; }
    int entry_count() const { return static_cast<int>(entry_flags_.size()); }

private:
    const ProtectedSpec* spec_;
    std::vector<char> protected_flags_;
    std::vector<std::vector<char>> entry_flags_;
};

// Fraction of the list made of protected items, plus the fraction holding
// each protected (feature, value). The unprotected share is defined as the
// exact complement. Throws on an empty list.
struct ExposureResult {
    double fraction = 0.0;
    double unprotected_fraction = 1.0;
    std::vector<double> per_value; // aligned with spec.entries()
};

ExposureResult exposure(std::span<const int> items, const ExposureIndex& index);

// One measured sweep point: metrics macro-averaged over users.
struct MetricsRow {
    std::string algorithm;
    double lambda = 1.0;
    double precision = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
    double ild = 0.0;
    double entropy = 0.0;
    double exposure = 0.0;
    std::vector<double> per_value_exposure;
};

struct TradeoffPoint {
    double loss_level = 0.0;  // e.g. 0.01 for a 1% nDCG loss
    double target_ndcg = 0.0; // (1 - loss) * baseline nDCG
    std::optional<double> exposure; // empty when the level is not straddled
};

struct TradeoffReport {
    std::string algorithm;
    double baseline_ndcg = 0.0;
    std::vector<TradeoffPoint> points;
};

// Interpolated exposure at the given nDCG-loss levels, walking adjacent
// lambda points from the baseline (lambda = 1) downward. Never extrapolates
// beyond the measured range. Rows must be ordered by ascending lambda and
// contain a baseline row (lambda = 1 or algorithm "none").
TradeoffReport tradeoff_table(const std::vector<MetricsRow>& rows_by_lambda,
                              const std::vector<double>& loss_levels);

// Macro-average metrics for one (algorithm, lambda) sweep cell. Users with
// empty relevant sets are excluded from the accuracy averages only.
MetricsRow evaluate_lists(const std::vector<RerankedList>& lists,
                          const std::vector<std::unordered_set<int>>& relevant_by_user,
                          int k_prime, const ItemCatalog& catalog, const ExposureIndex& index,
                          const std::string& algorithm_tag, double lambda);

} // namespace fairrank

#endif
