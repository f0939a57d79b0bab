#ifndef FAIRRANK_BASELINE_HPP
#define FAIRRANK_BASELINE_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fairrank/catalog.hpp"

namespace fairrank {

struct NmfConfig {
    int rank = 16;
    int epochs = 30;
    std::uint64_t seed = 1;
};

// Non-negative factorization of the observed rating matrix, fit with
// multiplicative updates on observed-entry squared error.
class FactorModel {
public:
    FactorModel(int users, int items, int rank)
        : users_(users), items_(items), rank_(rank),
          user_factors_(static_cast<std::size_t>(users) * rank),
          item_factors_(static_cast<std::size_t>(items) * rank) {}

    int user_count() const { return users_; }
    int item_count() const { return items_; }
    int rank() const { return rank_; }

    double* user_row(int u) { return user_factors_.data() + static_cast<std::size_t>(u) * rank_; }
    const double* user_row(int u) const {
        return user_factors_.data() + static_cast<std::size_t>(u) * rank_;
    }
    double* item_row(int i) { return item_factors_.data() + static_cast<std::size_t>(i) * rank_; }
    const double* item_row(int i) const {
        return item_factors_.data() + static_cast<std::size_t>(i) * rank_;
    }

    double score(int u, int i) const {
        const double* w = user_row(u);
        const double* h = item_row(i);
        double s = 0.0;
        for (int r = 0; r < rank_; ++r) s += w[r] * h[r];
        return s;
    }

    // Squared error over observed train entries after each epoch.
    const std::vector<double>& objective_trace() const { return objective_trace_; }
    std::vector<double>& objective_trace() { return objective_trace_; }

private:
    int users_;
    int items_;
    int rank_;
    std::vector<double> user_factors_;
    std::vector<double> item_factors_;
    std::vector<double> objective_trace_;
};

// Baseline top-k ranking for one user: (item index, score) pairs in
// descending score order with ascending item-id tie-break, excluding the
// user's train-split items. `truncated` flags lists cut short because fewer
// than k unseen items exist.
struct CandidateList {
    int user = -1;
    std::vector<std::pair<int, double>> items;
    bool truncated = false;
};

FactorModel train_nmf(const Interactions& interactions, const ItemCatalog& catalog,
                      const NmfConfig& config);

CandidateList top_k(const FactorModel& model, const Interactions& interactions,
                    const ItemCatalog& catalog, int user, int k);

// Externally computed relevance scores, CSV columns user_id,item_id,score.
// Lists come back sorted per the CandidateList ordering; duplicate
// (user, item) rows and unknown ids are errors.
std::vector<CandidateList> load_scores(const std::filesystem::path& path,
                                       const ItemCatalog& catalog,
                                       const Interactions& interactions);

// Seeded per-interaction holdout. `stratified` draws the test set per user
// instead of globally per interaction.
std::vector<InteractionRecord> split_interactions(std::vector<InteractionRecord> records,
                                                  double test_fraction, std::uint64_t seed,
                                                  bool stratified = false);

// Factor checkpoint: CSV dumps of both factor matrices.
void write_factors_csv(const std::filesystem::path& user_path,
                       const std::filesystem::path& item_path, const FactorModel& model,
                       const Interactions& interactions, const ItemCatalog& catalog);

} // namespace fairrank

#endif
