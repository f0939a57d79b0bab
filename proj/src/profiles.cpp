#include "fairrank/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairrank/csv.hpp"

namespace fairrank {

std::vector<double> feature_distribution(std::span<const int> profile_items, int feature,
                                         const ItemCatalog& catalog) {
    if (profile_items.empty())
        throw std::invalid_argument("feature_distribution: empty profile");

    const auto& schema = catalog.schema();
    std::vector<double> counts(schema.cardinality(feature), 0.0);
    double total = 0.0;
    for (int idx : profile_items) {
        for (int v : catalog.item(idx).values[feature]) {
            counts[v] += 1.0;
            total += 1.0;
        }
    }
    for (double& c : counts) c /= total;
    return counts;
}

namespace {

double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log2(x);
    return std::max(h, 0.0); // guard against -0.0
}

} // namespace

ToleranceProfile tolerance(int user, std::span<const int> profile_items,
                           const ItemCatalog& catalog) {
    if (profile_items.empty())
        throw std::invalid_argument("tolerance: empty profile");

    const auto& schema = catalog.schema();
    ToleranceProfile profile;
    profile.user = user;
    profile.tau.resize(schema.feature_count());
    profile.gamma.assign(schema.dummy_size(), 0.0);
    for (int j = 0; j < schema.feature_count(); ++j) {
        double h = entropy_bits(feature_distribution(profile_items, j, catalog));
        profile.tau[j] = h;
        int offset = schema.dummy_offset(j);
        for (int v = 0; v < schema.cardinality(j); ++v)
            profile.gamma[offset + v] = h;
    }
    return profile;
}

CombinedWeights combine_weights(const ToleranceProfile& profile, std::span<const double> mask) {
    if (profile.gamma.size() != mask.size())
        throw std::invalid_argument("combine_weights: gamma and mask lengths differ");

    CombinedWeights weights;
    weights.user = profile.user;
    weights.z.resize(mask.size());
    for (std::size_t j = 0; j < mask.size(); ++j)
        weights.z[j] = std::max(profile.gamma[j], kToleranceFloor) * mask[j];
    return weights;
}

std::vector<ToleranceProfile> build_profiles(const Interactions& interactions,
                                             const ItemCatalog& catalog) {
    std::vector<ToleranceProfile> profiles(interactions.user_count());
    for (int u = 0; u < interactions.user_count(); ++u) {
        const auto& train = interactions.profile(u, Split::train);
        if (train.empty()) {
            profiles[u].user = u; // empty tau marks users without train data
            continue;
        }
        profiles[u] = tolerance(u, train, catalog);
    }
    return profiles;
}

void write_tolerance_csv(const std::filesystem::path& path,
                         const std::vector<ToleranceProfile>& profiles,
                         const Interactions& interactions, const FeatureSchema& schema) {
    CsvTable table;
    table.columns = {"user_id", "feature", "tau"};
    for (const auto& profile : profiles) {
        if (profile.tau.empty()) continue;
        for (int j = 0; j < schema.feature_count(); ++j)
            table.rows.push_back({interactions.user_id(profile.user), schema.feature(j).name,
                                  format_double(profile.tau[j])});
    }
    write_csv(path, table);
}

} // namespace fairrank
