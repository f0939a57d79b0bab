#include "fairrank/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "fairrank/rng.hpp"

namespace fairrank {

namespace {

double parse_numeric(const std::string& text, const std::string& column) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("column '" + column + "': non-numeric value '" + text + "'");
    }
}

std::vector<std::string> split_multi_value(const std::string& text) {
    std::vector<std::string> values;
    std::string current;
    for (char c : text) {
        if (c == '|') {
            if (!current.empty()) values.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) values.push_back(current);
    return values;
}

} // namespace

std::vector<FeatureAssignment> categorize(const CsvTable& raw,
                                          const std::vector<CategorizationRule>& rules,
                                          const std::unordered_set<std::string>* reference_ids) {
    const int id_col = raw.require_column("item_id");

    std::vector<FeatureAssignment> out;
    for (const auto& rule : rules) {
        const int col = raw.column_index(rule.column);
        if (col < 0)
            throw std::runtime_error("categorization rule '" + rule.feature +
                                     "': missing column '" + rule.column + "'");
        if (rule.kind == RuleKind::equal_buckets && rule.buckets < 2)
            throw std::runtime_error("categorization rule '" + rule.feature +
                                     "': bucket count must be at least 2");

        auto in_reference = [&](const std::string& id) {
            return reference_ids == nullptr || reference_ids->count(id) != 0;
        };

        if (rule.kind == RuleKind::passthrough) {
            for (const auto& row : raw.rows)
                for (const auto& value : split_multi_value(row[col]))
                    out.push_back({row[id_col], rule.feature, value});
            continue;
        }

        double cut = rule.threshold;
        std::vector<double> edges; // inclusive upper bucket edges for equal_buckets
        if (rule.kind == RuleKind::threshold_vs_mean) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& row : raw.rows) {
                if (!in_reference(row[id_col])) continue;
                sum += parse_numeric(row[col], rule.column);
                ++count;
            }
            if (count == 0)
                throw std::runtime_error("categorization rule '" + rule.feature +
                                         "': no reference rows for column '" + rule.column + "'");
            cut = sum / static_cast<double>(count);
        } else if (rule.kind == RuleKind::equal_buckets) {
            std::vector<double> values;
            for (const auto& row : raw.rows)
                if (in_reference(row[id_col])) values.push_back(parse_numeric(row[col], rule.column));
            if (values.empty())
                throw std::runtime_error("categorization rule '" + rule.feature +
                                         "': no reference rows for column '" + rule.column + "'");
            std::sort(values.begin(), values.end());
            if (values.front() == values.back())
                throw std::runtime_error("categorization rule '" + rule.feature + "': column '" +
                                         rule.column +
                                         "' is constant, cannot form quantile buckets");
            const std::size_t n = values.size();
            for (int b = 0; b < rule.buckets; ++b) {
                std::size_t pos = (static_cast<std::size_t>(b) + 1) * n / rule.buckets;
                edges.push_back(values[pos == 0 ? 0 : pos - 1]);
            }
        }

        for (const auto& row : raw.rows) {
            const double v = parse_numeric(row[col], rule.column);
            std::string label;
            if (rule.kind == RuleKind::equal_buckets) {
                int bucket = rule.buckets - 1;
                for (int b = 0; b < rule.buckets; ++b) {
                    if (v <= edges[b]) {
                        bucket = b;
                        break;
                    }
                }
                label = "b" + std::to_string(bucket);
            } else {
                label = v > cut ? rule.label_above : rule.label_below;
            }
            out.push_back({row[id_col], rule.feature, label});
        }
    }
    return out;
}

std::vector<RawItem> assignments_to_items(const std::vector<FeatureAssignment>& assignments) {
    std::vector<RawItem> items;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& a : assignments) {
        auto [it, inserted] = index.emplace(a.item_id, items.size());
        if (inserted) items.push_back({a.item_id, {}});
        items[it->second].features[a.feature].insert(a.value);
    }
    return items;
}

double pfr(double days_to_fund) {
    if (!(days_to_fund > 0.0))
        throw std::invalid_argument("pfr: days to fund must be positive");
    return 100.0 / days_to_fund;
}

std::vector<double> matching_distance_matrix(const std::vector<Item>& items,
                                             const std::vector<int>& feature_indices,
                                             int feature_count) {
    (void)feature_count;
    const int n = static_cast<int>(items.size());
    const double d = static_cast<double>(feature_indices.size());
    std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            int differing = 0;
            for (int j : feature_indices)
                if (items[a].values[j] != items[b].values[j]) ++differing;
            double value = differing / d;
            dist[static_cast<std::size_t>(a) * n + b] = value;
            dist[static_cast<std::size_t>(b) * n + a] = value;
        }
    }
    return dist;
}

namespace {

// Average-linkage merge sequence via Lance-Williams updates. Ties resolve to
// the lexicographically smallest cluster pair so runs are reproducible.
std::vector<std::pair<int, int>> merge_sequence(const std::vector<double>& dist, int n) {
    std::vector<double> d(dist);
    std::vector<int> size(n, 1);
    std::vector<bool> active(n, true);
    std::vector<std::pair<int, int>> merges;
    merges.reserve(n - 1);

    auto at = [&](int a, int b) -> double& { return d[static_cast<std::size_t>(a) * n + b]; };

    for (int step = 0; step + 1 < n; ++step) {
        int best_a = -1, best_b = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (int b = a + 1; b < n; ++b) {
                if (!active[b]) continue;
                if (at(a, b) < best) {
                    best = at(a, b);
                    best_a = a;
                    best_b = b;
                }
            }
        }
        for (int k = 0; k < n; ++k) {
            if (!active[k] || k == best_a || k == best_b) continue;
            at(best_a, k) = at(k, best_a) =
                (size[best_a] * at(best_a, k) + size[best_b] * at(best_b, k)) /
                (size[best_a] + size[best_b]);
        }
        size[best_a] += size[best_b];
        active[best_b] = false;
        merges.emplace_back(best_a, best_b);
    }
    return merges;
}

std::vector<int> labels_at_count(const std::vector<std::pair<int, int>>& merges, int n,
                                 int cluster_count) {
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    const int to_apply = n - cluster_count;
    for (int s = 0; s < to_apply; ++s) parent[find(merges[s].second)] = find(merges[s].first);

    // Renumber clusters by smallest member.
    std::vector<int> labels(n);
    std::map<int, int> order;
    for (int i = 0; i < n; ++i) {
        int root = find(i);
        auto it = order.emplace(root, static_cast<int>(order.size())).first;
        labels[i] = it->second;
    }
    return labels;
}

} // namespace

std::vector<int> agglomerative_average_linkage(const std::vector<double>& dist, int n,
                                               int cluster_count) {
    if (cluster_count < 1 || cluster_count > n)
        throw std::invalid_argument("agglomerative clustering: cluster count out of range");
    return labels_at_count(merge_sequence(dist, n), n, cluster_count);
}

double mean_silhouette(const std::vector<double>& dist, int n, const std::vector<int>& labels) {
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> cluster_size(k, 0);
    for (int label : labels) ++cluster_size[label];

    double total = 0.0;
    std::vector<double> mean_to(k);
    for (int i = 0; i < n; ++i) {
        if (cluster_size[labels[i]] == 1) continue; // singleton contributes 0
        std::fill(mean_to.begin(), mean_to.end(), 0.0);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_to[labels[j]] += dist[static_cast<std::size_t>(i) * n + j];
        }
        double a = mean_to[labels[i]] / (cluster_size[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == labels[i] || cluster_size[c] == 0) continue;
            b = std::min(b, mean_to[c] / cluster_size[c]);
        }
        total += (b - a) / std::max(a, b);
    }
    return total / n;
}

PseudoItemResult build_pseudo_items(const std::vector<InteractionRecord>& interactions,
                                    const std::vector<RawItem>& item_features,
                                    const PseudoItemConfig& config) {
    if (item_features.size() < 2)
        throw std::invalid_argument("build_pseudo_items: need at least 2 items");
    if (config.core_threshold < 1)
        throw std::invalid_argument("build_pseudo_items: core threshold must be at least 1");
    if (config.candidate_cluster_counts.empty())
        throw std::invalid_argument("build_pseudo_items: no candidate cluster counts");

    const FeatureSchema schema = build_schema(item_features);
    std::vector<Item> items;
    items.reserve(item_features.size());
    std::unordered_map<std::string, int> item_index;
    for (const auto& raw : item_features) {
        item_index.emplace(raw.id, static_cast<int>(items.size()));
        items.push_back(resolve_item(raw, schema));
    }

    std::vector<int> feature_indices;
    if (config.features.empty()) {
        for (int j = 0; j < schema.feature_count(); ++j) feature_indices.push_back(j);
    } else {
        for (const auto& name : config.features) {
            int j = schema.feature_index(name);
            if (j < 0)
                throw std::invalid_argument("build_pseudo_items: unknown clustering feature '" +
                                            name + "'");
            feature_indices.push_back(j);
        }
    }

    const int n = static_cast<int>(items.size());
    const auto dist = matching_distance_matrix(items, feature_indices, schema.feature_count());
    const auto merges = merge_sequence(dist, n);

    int best_count = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<int> best_labels;
    for (int count : config.candidate_cluster_counts) {
        if (count < 2 || count > n) continue;
        std::vector<int> labels = labels_at_count(merges, n, count);
        double score = mean_silhouette(dist, n, labels);
        if (score > best_score) {
            best_score = score;
            best_count = count;
            best_labels = std::move(labels);
        }
    }
    if (best_count < 0)
        throw std::runtime_error(
            "build_pseudo_items: no candidate count yields at least 2 clusters");

    // Per-cluster modal value per feature, ties to the lexicographically
    // smallest value.
    std::vector<RawItem> pseudo(best_count);
    int width = 1;
    for (int c = best_count - 1; c >= 10; c /= 10) ++width;
    for (int c = 0; c < best_count; ++c) {
        std::string id = std::to_string(c);
        pseudo[c].id = "p" + std::string(width - id.size(), '0') + id;
    }
    for (int j = 0; j < schema.feature_count(); ++j) {
        std::vector<std::map<std::string, int>> counts(best_count);
        for (int i = 0; i < n; ++i)
            for (int v : items[i].values[j])
                ++counts[best_labels[i]][schema.feature(j).values[v]];
        for (int c = 0; c < best_count; ++c) {
            const auto& count = counts[c];
            auto best = count.begin();
            for (auto it = count.begin(); it != count.end(); ++it)
                if (it->second > best->second) best = it;
            pseudo[c].features[schema.feature(j).name] = {best->first};
        }
    }

    // Remap interactions onto pseudo-items, collapsing duplicates by mean.
    std::map<std::pair<std::string, int>, std::pair<double, int>> collapsed;
    for (const auto& rec : interactions) {
        auto it = item_index.find(rec.item_id);
        if (it == item_index.end())
            throw std::invalid_argument("build_pseudo_items: interaction references unknown item '" +
                                        rec.item_id + "'");
        auto& slot = collapsed[{rec.user_id, best_labels[it->second]}];
        slot.first += rec.rating;
        slot.second += 1;
    }

    // Iterated k-core on the user x pseudo-item graph.
    std::map<std::string, int> user_degree;
    std::vector<int> item_degree(best_count, 0);
    std::unordered_set<std::string> dead_users;
    std::vector<bool> dead_items(best_count, false);
    bool changed = true;
    while (changed) {
        changed = false;
        user_degree.clear();
        std::fill(item_degree.begin(), item_degree.end(), 0);
        for (const auto& [key, value] : collapsed) {
            if (dead_users.count(key.first) || dead_items[key.second]) continue;
            ++user_degree[key.first];
            ++item_degree[key.second];
        }
        for (const auto& [user, degree] : user_degree) {
            if (degree < config.core_threshold) {
                dead_users.insert(user);
                changed = true;
            }
        }
        for (int c = 0; c < best_count; ++c) {
            if (!dead_items[c] && item_degree[c] < config.core_threshold) {
                dead_items[c] = true;
                changed = true;
            }
        }
    }

    PseudoItemResult result;
    result.cluster_count = best_count;
    result.silhouette = best_score;
    int surviving_items = 0;
    for (int c = 0; c < best_count; ++c)
        if (!dead_items[c]) ++surviving_items;
    int surviving_users = 0;
    for (const auto& [user, degree] : user_degree)
        if (!dead_users.count(user)) ++surviving_users;
    if (surviving_items == 0 || surviving_users == 0)
        throw std::runtime_error("build_pseudo_items: k-core filtering emptied the dataset (" +
                                 std::to_string(surviving_users) + " users, " +
                                 std::to_string(surviving_items) + " pseudo-items survive at " +
                                 "threshold " + std::to_string(config.core_threshold) + ")");

    for (int c = 0; c < best_count; ++c)
        if (!dead_items[c]) result.items.push_back(pseudo[c]);
    for (const auto& [key, value] : collapsed) {
        if (dead_users.count(key.first) || dead_items[key.second]) continue;
        result.interactions.push_back(
            {key.first, pseudo[key.second].id, value.first / value.second, Split::train});
    }
    return result;
}

SyntheticDataset synth_dataset(const SyntheticSpec& spec) {
    if (spec.users < 1 || spec.items < 1)
        throw std::invalid_argument("synth_dataset: users and items must be positive");
    if (spec.features.empty())
        throw std::invalid_argument("synth_dataset: at least one feature required");
    if (!(spec.protected_prevalence > 0.0 && spec.protected_prevalence < 1.0))
        throw std::invalid_argument("synth_dataset: protected prevalence must be in (0, 1)");
    if (!(spec.rating_density > 0.0 && spec.rating_density <= 1.0))
        throw std::invalid_argument("synth_dataset: rating density must be in (0, 1]");
    if (spec.concentrations.empty())
        throw std::invalid_argument("synth_dataset: concentration list is empty");
    for (double c : spec.concentrations)
        if (!(c > 0.0))
            throw std::invalid_argument("synth_dataset: concentrations must be positive");

    const int d = static_cast<int>(spec.features.size());
    std::vector<std::vector<int>> protected_values(d); // value index per feature
    for (const auto& entry : spec.protected_entries) {
        int j = -1;
        for (int f = 0; f < d; ++f)
            if (spec.features[f].name == entry.feature) j = f;
        if (j < 0)
            throw std::invalid_argument("synth_dataset: protected entry references unknown "
                                        "feature '" + entry.feature + "'");
        if (entry.value.size() < 2 || entry.value[0] != 'v')
            throw std::invalid_argument("synth_dataset: protected value '" + entry.value +
                                        "' must use the generated v<index> names");
        int v = std::stoi(entry.value.substr(1));
        if (v < 0 || v >= spec.features[j].cardinality)
            throw std::invalid_argument("synth_dataset: protected value '" + entry.value +
                                        "' out of range for feature '" + entry.feature + "'");
        protected_values[j].push_back(v);
    }
    for (auto& values : protected_values) {
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
    }

    auto pad = [](int value, int max_value, char prefix) {
        int width = 1;
        for (int v = max_value; v >= 10; v /= 10) ++width;
        std::string digits = std::to_string(value);
        return prefix + std::string(width - digits.size(), '0') + digits;
    };

    Rng rng(spec.seed);
    SyntheticDataset out;

    // Items: protected-bearing features draw a protected value with the
    // configured prevalence, everything else uniformly.
    std::vector<std::vector<int>> item_values(spec.items, std::vector<int>(d));
    out.items.resize(spec.items);
    for (int i = 0; i < spec.items; ++i) {
        RawItem& item = out.items[i];
        item.id = pad(i, spec.items - 1, 'i');
        for (int j = 0; j < d; ++j) {
            const int c = spec.features[j].cardinality;
            const auto& prot = protected_values[j];
            int v;
            if (prot.empty() || static_cast<int>(prot.size()) == c) {
                v = static_cast<int>(rng.below(c));
            } else if (rng.next_double() < spec.protected_prevalence) {
                v = prot[rng.below(prot.size())];
            } else {
                int pick = static_cast<int>(rng.below(c - prot.size()));
                v = 0;
                for (int candidate = 0; candidate < c; ++candidate) {
                    if (std::binary_search(prot.begin(), prot.end(), candidate)) continue;
                    if (pick-- == 0) {
                        v = candidate;
                        break;
                    }
                }
            }
            item_values[i][j] = v;
            item.features[spec.features[j].name] = {"v" + std::to_string(v)};
        }
    }

    // Users: a preferred value and a concentration per feature; items are
    // sampled without replacement proportional to concentration^matches.
    const int n_ratings = std::min(spec.items, std::max(1, static_cast<int>(std::lround(
                                                               spec.rating_density * spec.items))));
    std::vector<double> weights(spec.items);
    for (int u = 0; u < spec.users; ++u) {
        const std::string user_id = pad(u, spec.users - 1, 'u');
        std::vector<int> preferred(d);
        std::vector<double> concentration(d);
        for (int j = 0; j < d; ++j) {
            preferred[j] = static_cast<int>(rng.below(spec.features[j].cardinality));
            concentration[j] = spec.concentrations[rng.below(spec.concentrations.size())] *
                               spec.features[j].concentration_scale;
        }

        double total = 0.0;
        for (int i = 0; i < spec.items; ++i) {
            double w = 1.0;
            for (int j = 0; j < d; ++j)
                if (item_values[i][j] == preferred[j]) w *= concentration[j];
            weights[i] = w;
            total += w;
        }

        for (int pick = 0; pick < n_ratings; ++pick) {
            double x = rng.next_double() * total;
            int chosen = -1;
            for (int i = 0; i < spec.items; ++i) {
                if (weights[i] <= 0.0) continue;
                x -= weights[i];
                if (x < 0.0) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) { // numeric tail: take the last available item
                for (int i = spec.items - 1; i >= 0; --i) {
                    if (weights[i] > 0.0) {
                        chosen = i;
                        break;
                    }
                }
            }
            int matches = 0;
            for (int j = 0; j < d; ++j)
                if (item_values[chosen][j] == preferred[j]) ++matches;
            out.interactions.push_back({user_id, out.items[chosen].id,
                                        1.0 + 4.0 * matches / static_cast<double>(d),
                                        Split::train});
            total -= weights[chosen];
            weights[chosen] = 0.0;
        }
    }
    return out;
}

} // namespace fairrank
