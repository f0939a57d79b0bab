#ifndef FAIRRANK_RERANK_HPP
#define FAIRRANK_RERANK_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairrank/baseline.hpp"
#include "fairrank/catalog.hpp"
#include "fairrank/profiles.hpp"

namespace fairrank {

enum class Algorithm {
    none,          // keep the baseline order
    mmr,           // aggregate-difference MMR, plain cosine
    mmr_tolerance, // MMR with tolerance weights only
    mmr_fairness,  // MMR with protected-group weights only
    ofair,         // MMR with combined tolerance x fairness weights
    xquad,         // binary new-aspect boost
    far,           // new-value boost on one sensitive dimension
    pfar,          // FAR boost scaled by the user's tolerance on that dimension
};

const std::vector<Algorithm>& all_algorithms();
std::string algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);
bool uses_similarity(Algorithm a); // MMR-family algorithms
bool uses_sensitive_feature(Algorithm a);

struct RerankConfig {
    Algorithm algorithm = Algorithm::none;
    double lambda = 1.0;
    int k_prime = 10;
    int sensitive_feature = -1; // schema feature index, far/pfar only

    void validate(const FeatureSchema& schema) const;
};

struct RerankedList {
    int user = -1;
    // (item index, greedy score at selection time) in selection order.
    std::vector<std::pair<int, double>> items;
    Algorithm algorithm = Algorithm::none;
    double lambda = 1.0;
};

// Weighted cosine over epsilon-smoothed dummy vectors; weights must be
// strictly positive. Symmetric, in (0, 1] on smoothed inputs, invariant to
// positive rescaling of z.
double wcos(std::span<const double> b, std::span<const double> b_prime,
            std::span<const double> z);

// Marginal score of the candidate at `pos` in the input list given the
// already-selected candidate positions.
using MarginalScorer =
    std::function<double(int pos, std::span<const int> selected_positions)>;

// Greedy list accumulation: repeatedly append the remaining candidate with
// the highest marginal score, ties broken by original candidate rank. Stops
// after min(k_prime, |candidates|) selections.
RerankedList greedy_rerank(const CandidateList& candidates, const MarginalScorer& scorer,
                           int k_prime);

// Scoring rules, expressed over catalog items. `selected` holds item indices.
using SimilarityFn = std::function<double(int item_a, int item_b)>;

double score_mmr(double rec_score, int item, std::span<const int> selected, double lambda,
                 const SimilarityFn& similarity);
double score_ofair(const ItemCatalog& catalog, double rec_score, int item,
                   std::span<const int> selected, double lambda, std::span<const double> z);
double score_xquad(const ItemCatalog& catalog, double rec_score, int item,
                   std::span<const int> selected, double lambda);
// t = 1 for FAR, tau_u[a] for PFAR. The boost is 1 iff the candidate's value
// on dimension a differs from every selected item's value.
double score_far_pfar(const ItemCatalog& catalog, double rec_score, int item,
                      std::span<const int> selected, double lambda, int sensitive_feature,
                      double t);

// Lazily filled pairwise similarity cache over one candidate list. Valid to
// reuse across lambda values because similarities do not depend on lambda.
class PairSimCache {
public:
    PairSimCache(const ItemCatalog& catalog, const CandidateList& candidates,
                 std::vector<double> z);

    double sim(int pos_a, int pos_b);
    const std::vector<double>& weights() const { return z_; }

private:
    const ItemCatalog& catalog_;
    const CandidateList& candidates_;
    std::vector<double> z_;
    std::vector<double> cache_; // n x n, NaN = not yet computed
    int n_;
};

// Similarity weight vector for one user under the given algorithm:
//   mmr           -> all ones (plain cosine)
//   mmr_tolerance -> floored tolerance expansion, uniform mask
//   mmr_fairness  -> protected mask, uniform tolerance
//   ofair         -> floored tolerance x protected mask
std::vector<double> similarity_weights(Algorithm algorithm, const ToleranceProfile& profile,
                                       std::span<const double> mask);

// Re-rank one user's candidate list. `sim_cache` is required for MMR-family
// algorithms and ignored otherwise; `profile` is required for pfar.
RerankedList rerank_list(const ItemCatalog& catalog, const CandidateList& candidates,
                         const RerankConfig& config, PairSimCache* sim_cache,
                         const ToleranceProfile* profile);

// CSV export: user_id, rank, item_id, score, algorithm, lambda.
void write_reranked_csv(const std::filesystem::path& path,
                        const std::vector<RerankedList>& lists,
                        const Interactions& interactions, const ItemCatalog& catalog);

} // namespace fairrank

#endif
