#include "fairrank/catalog.hpp"

#include <algorithm>
#include <stdexcept>

#include "fairrank/csv.hpp"

namespace fairrank {

FeatureSchema::FeatureSchema(std::vector<FeatureDim> features) : features_(std::move(features)) {
    std::sort(features_.begin(), features_.end(),
              [](const FeatureDim& a, const FeatureDim& b) { return a.name < b.name; });
    offsets_.reserve(features_.size());
    value_lookup_.resize(features_.size());
    for (std::size_t j = 0; j < features_.size(); ++j) {
        auto& dim = features_[j];
        if (dim.values.empty())
            throw std::invalid_argument("feature '" + dim.name + "' has no values");
        std::sort(dim.values.begin(), dim.values.end());
        if (std::adjacent_find(dim.values.begin(), dim.values.end()) != dim.values.end())
            throw std::invalid_argument("feature '" + dim.name + "' has duplicate values");
        if (!feature_lookup_.emplace(dim.name, static_cast<int>(j)).second)
            throw std::invalid_argument("duplicate feature name '" + dim.name + "'");
        offsets_.push_back(dummy_size_);
        for (std::size_t v = 0; v < dim.values.size(); ++v)
            value_lookup_[j].emplace(dim.values[v], static_cast<int>(v));
        dummy_size_ += static_cast<int>(dim.values.size());
    }
}

int FeatureSchema::feature_index(const std::string& name) const {
    auto it = feature_lookup_.find(name);
    return it == feature_lookup_.end() ? -1 : it->second;
}

int FeatureSchema::value_index(int feature, const std::string& value) const {
    const auto& lookup = value_lookup_[feature];
    auto it = lookup.find(value);
    return it == lookup.end() ? -1 : it->second;
}

std::pair<int, int> FeatureSchema::dummy_owner(int coord) const {
    for (int j = feature_count() - 1; j >= 0; --j) {
        if (coord >= offsets_[j]) return {j, coord - offsets_[j]};
    }
    throw std::out_of_range("dummy coordinate out of range");
}

bool Item::holds(int feature, int value) const {
    const auto& vals = values[feature];
    return std::binary_search(vals.begin(), vals.end(), value);
}

FeatureSchema build_schema(const std::vector<RawItem>& raw_items) {
    if (raw_items.empty())
        throw std::invalid_argument("cannot build a schema from zero items");

    std::map<std::string, std::set<std::string>> observed;
    for (const auto& item : raw_items)
        for (const auto& [name, values] : item.features)
            observed[name].insert(values.begin(), values.end());

    for (const auto& item : raw_items) {
        for (const auto& [name, ignored] : observed) {
            auto it = item.features.find(name);
            if (it == item.features.end() || it->second.empty())
                throw std::invalid_argument("item '" + item.id + "' missing feature '" + name +
                                            "'");
        }
    }

    std::vector<FeatureDim> dims;
    dims.reserve(observed.size());
    for (const auto& [name, values] : observed)
        dims.push_back({name, std::vector<std::string>(values.begin(), values.end())});
    return FeatureSchema(std::move(dims));
}

Item resolve_item(const RawItem& raw, const FeatureSchema& schema) {
    Item item;
    item.id = raw.id;
    item.values.resize(schema.feature_count());
    for (int j = 0; j < schema.feature_count(); ++j) {
        const auto& dim = schema.feature(j);
        auto it = raw.features.find(dim.name);
        if (it == raw.features.end() || it->second.empty())
            throw std::invalid_argument("item '" + raw.id + "' missing feature '" + dim.name +
                                        "'");
        for (const auto& value : it->second) {
            int v = schema.value_index(j, value);
            if (v < 0)
                throw std::invalid_argument("item '" + raw.id + "': unknown value '" + value +
                                            "' for feature '" + dim.name + "'");
            item.values[j].push_back(v);
        }
        std::sort(item.values[j].begin(), item.values[j].end());
    }
    for (const auto& [name, ignored] : raw.features)
        if (schema.feature_index(name) < 0)
            throw std::invalid_argument("item '" + raw.id + "': unknown feature '" + name + "'");
    return item;
}

DummyVector encode_item(const Item& item, const FeatureSchema& schema) {
    DummyVector dummy;
    dummy.values.assign(schema.dummy_size(), kEpsilonSmoothing);
    for (int j = 0; j < schema.feature_count(); ++j)
        for (int v : item.values[j])
            dummy.values[schema.dummy_index(j, v)] = 1.0;
    return dummy;
}

ProtectedSpec::ProtectedSpec(std::vector<Entry> entries, double alpha)
    : ProtectedSpec(std::move(entries), alpha, alpha / 100.0) {}

ProtectedSpec::ProtectedSpec(std::vector<Entry> entries, double alpha, double unprotected_weight)
    : entries_(std::move(entries)), alpha_(alpha), unprotected_weight_(unprotected_weight) {
    if (!(alpha_ > 0.0))
        throw std::invalid_argument("alpha must be positive");
    if (!(unprotected_weight_ > 0.0))
        throw std::invalid_argument("unprotected weight must be positive");
    if (!(unprotected_weight_ < alpha_))
        throw std::invalid_argument("unprotected weight must be below alpha");
    std::sort(entries_.begin(), entries_.end());
    entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

std::vector<double> protected_mask(const ProtectedSpec& spec, const FeatureSchema& schema) {
    std::vector<double> mask(schema.dummy_size(), spec.unprotected_weight());
    for (const auto& entry : spec.entries()) {
        int j = schema.feature_index(entry.feature);
        if (j < 0)
            throw std::invalid_argument("protected entry references unknown feature '" +
                                        entry.feature + "'");
        int v = schema.value_index(j, entry.value);
        if (v < 0)
            throw std::invalid_argument("protected entry references unknown value '" +
                                        entry.value + "' of feature '" + entry.feature + "'");
        mask[schema.dummy_index(j, v)] = spec.alpha();
    }
    return mask;
}

bool is_protected_item(const Item& item, const ProtectedSpec& spec, const FeatureSchema& schema) {
    for (const auto& entry : spec.entries()) {
        int j = schema.feature_index(entry.feature);
        if (j < 0)
            throw std::invalid_argument("protected entry references unknown feature '" +
                                        entry.feature + "'");
        int v = schema.value_index(j, entry.value);
        if (v < 0)
            throw std::invalid_argument("protected entry references unknown value '" +
                                        entry.value + "' of feature '" + entry.feature + "'");
        if (item.holds(j, v)) return true;
    }
    return false;
}

ItemCatalog::ItemCatalog(FeatureSchema schema, std::vector<Item> items)
    : schema_(std::move(schema)), items_(std::move(items)) {
    dummies_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const auto& item = items_[i];
        if (!index_.emplace(item.id, static_cast<int>(i)).second)
            throw std::invalid_argument("duplicate item id '" + item.id + "'");
        for (int j = 0; j < schema_.feature_count(); ++j)
            if (item.values[j].empty())
                throw std::invalid_argument("item '" + item.id + "' missing feature '" +
                                            schema_.feature(j).name + "'");
        dummies_.push_back(encode_item(item, schema_).values);
    }
}

ItemCatalog ItemCatalog::from_raw(const std::vector<RawItem>& raw_items) {
    FeatureSchema schema = build_schema(raw_items);
    std::vector<Item> items;
    items.reserve(raw_items.size());
    for (const auto& raw : raw_items)
        items.push_back(resolve_item(raw, schema));
    return ItemCatalog(std::move(schema), std::move(items));
}

int ItemCatalog::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw std::invalid_argument("unknown item id '" + id + "'");
    return it->second;
}

Interactions::Interactions(const std::vector<InteractionRecord>& records,
                           const ItemCatalog& catalog) {
    std::set<std::string> users;
    for (const auto& rec : records) users.insert(rec.user_id);
    user_ids_.assign(users.begin(), users.end());
    for (std::size_t u = 0; u < user_ids_.size(); ++u)
        user_lookup_.emplace(user_ids_[u], static_cast<int>(u));

    train_profiles_.resize(user_ids_.size());
    test_profiles_.resize(user_ids_.size());
    rows_.reserve(records.size());

    std::set<std::pair<int, long long>> seen; // (split tag << user) x item
    for (const auto& rec : records) {
        int u = user_lookup_.at(rec.user_id);
        int i = catalog.index_of(rec.item_id);
        long long key = static_cast<long long>(u) * catalog.item_count() + i;
        if (!seen.insert({rec.split == Split::train ? 0 : 1, key}).second)
            throw std::invalid_argument("duplicate interaction (" + rec.user_id + ", " +
                                        rec.item_id + ") in " + split_name(rec.split) +
                                        " split");
        rows_.push_back({u, i, rec.rating, rec.split});
        (rec.split == Split::train ? train_profiles_ : test_profiles_)[u].push_back(i);
    }
    for (auto& p : train_profiles_) std::sort(p.begin(), p.end());
    for (auto& p : test_profiles_) std::sort(p.begin(), p.end());
}

int Interactions::user_index(const std::string& id) const {
    auto it = user_lookup_.find(id);
    if (it == user_lookup_.end())
        throw std::invalid_argument("unknown user id '" + id + "'");
    return it->second;
}

const std::vector<int>& Interactions::profile(int u, Split s) const {
    return s == Split::train ? train_profiles_[u] : test_profiles_[u];
}

std::size_t Interactions::count(Split s) const {
    std::size_t n = 0;
    for (const auto& row : rows_)
        if (row.split == s) ++n;
    return n;
}

std::string split_name(Split s) { return s == Split::train ? "train" : "test"; }

Split parse_split(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    throw std::invalid_argument("unknown split tag '" + name + "' (expected train or test)");
}

std::vector<RawItem> read_item_assignments(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    int id_col = table.require_column("item_id");
    int feat_col = table.require_column("feature");
    int val_col = table.require_column("value");

    std::vector<RawItem> items;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& row : table.rows) {
        const std::string& id = row[id_col];
        auto [it, inserted] = index.emplace(id, items.size());
        if (inserted) items.push_back({id, {}});
        items[it->second].features[row[feat_col]].insert(row[val_col]);
    }
    return items;
}

std::vector<InteractionRecord> read_interactions(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    int user_col = table.require_column("user_id");
    int item_col = table.require_column("item_id");
    int rating_col = table.require_column("rating");
    int split_col = table.column_index("split"); // optional; defaults to train

    std::vector<InteractionRecord> records;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        InteractionRecord rec;
        rec.user_id = row[user_col];
        rec.item_id = row[item_col];
        try {
            rec.rating = std::stod(row[rating_col]);
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ": bad rating '" + row[rating_col] +
                                     "' for (" + rec.user_id + ", " + rec.item_id + ")");
        }
        if (split_col >= 0 && !row[split_col].empty()) rec.split = parse_split(row[split_col]);
        records.push_back(std::move(rec));
    }
    return records;
}

void write_item_assignments(const std::filesystem::path& path,
                            const std::vector<RawItem>& items) {
    CsvTable table;
    table.columns = {"item_id", "feature", "value"};
    for (const auto& item : items)
        for (const auto& [feature, values] : item.features)
            for (const auto& value : values)
                table.rows.push_back({item.id, feature, value});
    write_csv(path, table);
}

void write_interactions(const std::filesystem::path& path,
                        const std::vector<InteractionRecord>& records) {
    CsvTable table;
    table.columns = {"user_id", "item_id", "rating", "split"};
    for (const auto& rec : records)
        table.rows.push_back({rec.user_id, rec.item_id, format_double(rec.rating),
                              split_name(rec.split)});
    write_csv(path, table);
}

} // namespace fairrank
