#ifndef FAIRRANK_CATALOG_HPP
#define FAIRRANK_CATALOG_HPP

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace fairrank {

// Smoothing constant for absent feature values in dummy encodings. Absent
// values are never exactly zero so cosine denominators stay well defined.
inline constexpr double kEpsilonSmoothing = 2.2e-16;

// Raw item description as it arrives from ingestion: every feature dimension
// maps to a non-empty set of categorical values (multi-valued dimensions such
// as movie genres are allowed).
struct RawItem {
    std::string id;
    std::map<std::string, std::set<std::string>> features;
};

struct FeatureDim {
    std::string name;
    std::vector<std::string> values; // lexicographic, unique
};

// Categorical feature space plus the induced dummy-variable index space.
// Dimensions and values are ordered lexicographically so the dummy index
// assignment is a pure function of the observed (feature, value) pairs.
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<FeatureDim> features);

    int feature_count() const { return static_cast<int>(features_.size()); }
    const FeatureDim& feature(int j) const { return features_[j]; }
    const std::vector<FeatureDim>& features() const { return features_; }

    int feature_index(const std::string& name) const;      // -1 if absent
    int value_index(int feature, const std::string& value) const; // -1 if absent

    int cardinality(int j) const { return static_cast<int>(features_[j].values.size()); }

    // Dummy space: one coordinate per (feature, value) pair.
    int dummy_size() const { return dummy_size_; }
    int dummy_offset(int feature) const { return offsets_[feature]; }
    int dummy_index(int feature, int value) const { return offsets_[feature] + value; }
    // Inverse map: dummy coordinate -> (feature, value).
    std::pair<int, int> dummy_owner(int coord) const;

private:
    std::vector<FeatureDim> features_;
    std::vector<int> offsets_;
    int dummy_size_ = 0;
    std::unordered_map<std::string, int> feature_lookup_;
    std::vector<std::unordered_map<std::string, int>> value_lookup_;
};

// Item resolved against a schema: per feature dimension, the sorted set of
// value indices it holds (at least one per dimension).
struct Item {
    std::string id;
    std::vector<std::vector<int>> values;

    bool holds(int feature, int value) const;
};

// epsilon-smoothed dummy encoding of one item.
struct DummyVector {
    std::vector<double> values;
};

// The (feature, value) pairs designated protected, with the weight applied to
// protected dummy coordinates (alpha) and to all remaining coordinates.
class ProtectedSpec {
public:
    struct Entry {
        std::string feature;
        std::string value;
        auto operator<=>(const Entry&) const = default;
    };

    ProtectedSpec() = default;
    ProtectedSpec(std::vector<Entry> entries, double alpha);
    ProtectedSpec(std::vector<Entry> entries, double alpha, double unprotected_weight);

    const std::vector<Entry>& entries() const { return entries_; }
    double alpha() const { return alpha_; }
    double unprotected_weight() const { return unprotected_weight_; }

private:
    std::vector<Entry> entries_; // sorted, deduplicated
    double alpha_ = 1.0;
    double unprotected_weight_ = 0.01;
};

FeatureSchema build_schema(const std::vector<RawItem>& raw_items);
Item resolve_item(const RawItem& raw, const FeatureSchema& schema);
DummyVector encode_item(const Item& item, const FeatureSchema& schema);

// Per-dummy-coordinate weights: alpha on protected coordinates, the
// unprotected weight elsewhere. Throws if an entry does not resolve.
std::vector<double> protected_mask(const ProtectedSpec& spec, const FeatureSchema& schema);

// True iff the item holds at least one protected (feature, value).
bool is_protected_item(const Item& item, const ProtectedSpec& spec, const FeatureSchema& schema);

// Immutable store of schema + resolved items + precomputed dummy encodings.
class ItemCatalog {
public:
    ItemCatalog(FeatureSchema schema, std::vector<Item> items);

    static ItemCatalog from_raw(const std::vector<RawItem>& raw_items);

    const FeatureSchema& schema() const { return schema_; }
    int item_count() const { return static_cast<int>(items_.size()); }
    const Item& item(int idx) const { return items_[idx]; }
    const std::string& item_id(int idx) const { return items_[idx].id; }
    const std::vector<double>& dummy(int idx) const { return dummies_[idx]; }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }
    int index_of(const std::string& id) const; // throws on unknown id

private:
    FeatureSchema schema_;
    std::vector<Item> items_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<double>> dummies_;
};

enum class Split { train, test };

struct InteractionRecord {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;
    Split split = Split::train;
};

// Rating triples validated against a catalog, indexed by user. User order is
// lexicographic by id, independent of input row order.
class Interactions {
public:
    struct Row {
        int user;
        int item;
        double rating;
        Split split;
    };

    Interactions(const std::vector<InteractionRecord>& records, const ItemCatalog& catalog);

    int user_count() const { return static_cast<int>(user_ids_.size()); }
    const std::string& user_id(int u) const { return user_ids_[u]; }
    int user_index(const std::string& id) const; // throws on unknown id
    bool has_user(const std::string& id) const { return user_lookup_.count(id) != 0; }

    const std::vector<Row>& rows() const { return rows_; }
    const std::vector<int>& profile(int u, Split s) const;
    std::size_t count(Split s) const;

private:
    std::vector<std::string> user_ids_;
    std::unordered_map<std::string, int> user_lookup_;
    std::vector<Row> rows_;
    std::vector<std::vector<int>> train_profiles_;
    std::vector<std::vector<int>> test_profiles_;
};

// CSV interchange (header-first).
//   items:        item_id,feature,value   (one row per assignment)
//   interactions: user_id,item_id,rating,split
std::vector<RawItem> read_item_assignments(const std::filesystem::path& path);
std::vector<InteractionRecord> read_interactions(const std::filesystem::path& path);
void write_item_assignments(const std::filesystem::path& path, const std::vector<RawItem>& items);
void write_interactions(const std::filesystem::path& path,
                        const std::vector<InteractionRecord>& records);

std::string split_name(Split s);
Split parse_split(const std::string& name);

} // namespace fairrank

#endif
