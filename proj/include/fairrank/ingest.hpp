#ifndef FAIRRANK_INGEST_HPP
#define FAIRRANK_INGEST_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "fairrank/catalog.hpp"
#include "fairrank/csv.hpp"

namespace fairrank {

enum class RuleKind {
    threshold_vs_mean, // above/below the reference mean
    fixed_threshold,   // above/below a fixed cut
    equal_buckets,     // quantile buckets b0..b{n-1}
    passthrough,       // copy categorical values ('|'-separated for multi-valued)
};

struct CategorizationRule {
    std::string column;
    RuleKind kind = RuleKind::passthrough;
    std::string feature;           // output feature name
    double threshold = 0.0;        // fixed_threshold
    int buckets = 0;               // equal_buckets, must be >= 2
    std::string label_above = "high";
    std::string label_below = "low";
};

struct FeatureAssignment {
    std::string item_id;
    std::string feature;
    std::string value;
};

// Apply categorization rules to a raw metadata table (must carry an item_id
// column). Statistics for mean/quantile rules come from the reference subset
// when given (e.g. items present in the train split), otherwise from all
// rows.
std::vector<FeatureAssignment> categorize(
    const CsvTable& raw, const std::vector<CategorizationRule>& rules,
    const std::unordered_set<std::string>* reference_ids = nullptr);

std::vector<RawItem> assignments_to_items(const std::vector<FeatureAssignment>& assignments);

// Percentage funding rate: 100 / days-to-fund. Throws on non-positive input.
double pfr(double days_to_fund);

// --- pseudo-item construction -------------------------------------------

struct PseudoItemConfig {
    std::vector<std::string> features;        // clustering features; empty = all
    std::vector<int> candidate_cluster_counts; // each >= 2
    int core_threshold = 10;                   // minimum mutual degree
};

struct PseudoItemResult {
    std::vector<RawItem> items;                 // one per surviving cluster
    std::vector<InteractionRecord> interactions; // remapped, duplicates collapsed
    int cluster_count = 0;
    double silhouette = 0.0;
};

// Full n x n simple-matching distance matrix: the fraction of clustering
// features on which two items' value sets differ.
std::vector<double> matching_distance_matrix(const std::vector<Item>& items,
                                             const std::vector<int>& feature_indices,
                                             int feature_count);

// Cut an average-linkage agglomerative clustering of the distance matrix at
// `cluster_count` clusters; labels are renumbered 0..count-1 in order of each
// cluster's smallest member index.
std::vector<int> agglomerative_average_linkage(const std::vector<double>& dist, int n,
                                               int cluster_count);

// Mean silhouette over all points (0 contribution for singleton clusters).
double mean_silhouette(const std::vector<double>& dist, int n, const std::vector<int>& labels);

// Cluster items into pseudo-items (feature = per-cluster modal value, ties
// lexicographic), remap interactions onto them collapsing duplicate
// (user, pseudo-item) pairs by mean rating, then iterate the k-core filter
// to a fixpoint. Throws if no candidate count is feasible or the core filter
// empties the dataset.
PseudoItemResult build_pseudo_items(const std::vector<InteractionRecord>& interactions,
                                    const std::vector<RawItem>& item_features,
                                    const PseudoItemConfig& config);

// --- synthetic datasets ----------------------------------------------------

struct SyntheticFeature {
    std::string name;
    int cardinality = 2;             // values auto-named v0..v{c-1}
    double concentration_scale = 1.0; // multiplies the per-user concentration
};

struct SyntheticSpec {
    int users = 0;
    int items = 0;
    std::vector<SyntheticFeature> features;
    std::vector<ProtectedSpec::Entry> protected_entries;
    double protected_prevalence = 0.1; // per protected feature, in (0, 1)
    // Per-(user, feature) concentration is drawn uniformly from this list and
    // scaled by the feature's concentration_scale. 1 = uniform sampling
    // (maximum profile entropy); large values pin the user to one value.
    std::vector<double> concentrations = {1.0};
    double rating_density = 0.05; // fraction of the catalog each user rates
    std::uint64_t seed = 1;
};

struct SyntheticDataset {
    std::vector<RawItem> items;
    std::vector<InteractionRecord> interactions; // all tagged train; split later
};

SyntheticDataset synth_dataset(const SyntheticSpec& spec);

} // namespace fairrank

#endif
