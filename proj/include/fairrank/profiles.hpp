#ifndef FAIRRANK_PROFILES_HPP
#define FAIRRANK_PROFILES_HPP

#include <span>
#include <vector>

#include "fairrank/catalog.hpp"

namespace fairrank {

// Floor applied to tolerance weights before combining with the protected
// mask. A user whose profile is single-valued on every dimension would
// otherwise produce an all-zero weight vector and an undefined weighted
// cosine.
inline constexpr double kToleranceFloor = 1e-6;

// Per-user diversity tolerance: tau[j] is the Shannon entropy (bits) of the
// user's value-occurrence distribution on feature j; gamma repeats tau[j]
// across feature j's block of dummy coordinates.
struct ToleranceProfile {
    int user = -1;
    std::vector<double> tau;
    std::vector<double> gamma;
};

// Per-user dummy-space weights combining tolerance and protected-group
// weights; strictly positive everywhere.
struct CombinedWeights {
    int user = -1;
    std::vector<double> z;
};

// Occurrence distribution of feature j's values over a profile: every
// (item, value) assignment counts once, normalized by the total number of
// assignments in that dimension. Throws on an empty profile.
std::vector<double> feature_distribution(std::span<const int> profile_items, int feature,
                                         const ItemCatalog& catalog);

// Entropy per feature dimension plus the dummy-space expansion.
ToleranceProfile tolerance(int user, std::span<const int> profile_items,
                           const ItemCatalog& catalog);

// z_j = max(gamma_j, kToleranceFloor) * mask_j. Throws on length mismatch.
CombinedWeights combine_weights(const ToleranceProfile& profile,
                                std::span<const double> mask);

// Tolerance vectors for every user with a non-empty train profile, in user
// order; users with empty train profiles get an empty tau (skipped upstream).
std::vector<ToleranceProfile> build_profiles(const Interactions& interactions,
                                             const ItemCatalog& catalog);

// CSV export (user_id, feature, tau) for tolerance-distribution plots.
void write_tolerance_csv(const std::filesystem::path& path,
                         const std::vector<ToleranceProfile>& profiles,
                         const Interactions& interactions, const FeatureSchema& schema);

} // namespace fairrank

#endif
