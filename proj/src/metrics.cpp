#include "fairrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairrank {

double ndcg_at(std::span<const int> ranked_items, const std::unordered_set<int>& relevant,
               int k_prime) {
    if (k_prime < 1)
        throw std::invalid_argument("ndcg_at: k' must be at least 1");
    if (relevant.empty()) return 0.0;

    const int cutoff = std::min<int>(k_prime, ranked_items.size());
    double dcg = 0.0;
    for (int rank = 1; rank <= cutoff; ++rank)
        if (relevant.count(ranked_items[rank - 1]))
            dcg += 1.0 / std::log2(rank + 1.0);

    const int ideal_hits = std::min<int>(k_prime, relevant.size());
    double idcg = 0.0;
    for (int rank = 1; rank <= ideal_hits; ++rank) idcg += 1.0 / std::log2(rank + 1.0);
    return dcg / idcg;
}

std::pair<double, double> precision_recall_at(std::span<const int> ranked_items,
                                              const std::unordered_set<int>& relevant,
                                              int k_prime) {
    if (k_prime < 1)
        throw std::invalid_argument("precision_recall_at: k' must be at least 1");
    const int cutoff = std::min<int>(k_prime, ranked_items.size());
    if (cutoff == 0) return {0.0, 0.0};

    int hits = 0;
    for (int rank = 0; rank < cutoff; ++rank)
        if (relevant.count(ranked_items[rank])) ++hits;

    double precision = static_cast<double>(hits) / cutoff;
    double recall =
        relevant.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(relevant.size());
    return {precision, recall};
}

double intra_list_distance(std::span<const int> items, const ItemCatalog& catalog) {
    const int n = static_cast<int>(items.size());
    if (n < 2) return 0.0;

    const std::vector<double> uniform(catalog.schema().dummy_size(), 1.0);
    double total = 0.0;
    int pairs = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            total += 1.0 - wcos(catalog.dummy(items[a]), catalog.dummy(items[b]), uniform);
            ++pairs;
        }
    }
    return total / pairs;
}

double list_entropy(std::span<const int> items, const ItemCatalog& catalog) {
    if (items.empty())
        throw std::invalid_argument("list_entropy: empty list");

    const auto& schema = catalog.schema();
    double total = 0.0;
    for (int j = 0; j < schema.feature_count(); ++j) {
        std::vector<double> counts(schema.cardinality(j), 0.0);
        double occurrences = 0.0;
        for (int idx : items) {
            for (int v : catalog.item(idx).values[j]) {
                counts[v] += 1.0;
                occurrences += 1.0;
            }
        }
        double h = 0.0;
        for (double c : counts) {
            if (c <= 0.0) continue;
            double p = c / occurrences;
            h -= p * std::log2(p);
        }
        total += std::max(h, 0.0);
    }
    return total / schema.feature_count();
}

ExposureIndex::ExposureIndex(const ItemCatalog& catalog, const ProtectedSpec& spec)
    : spec_(&spec) {
    protected_flags_.assign(catalog.item_count(), 0);
    entry_flags_.assign(spec.entries().size(), std::vector<char>(catalog.item_count(), 0));
    const auto& schema = catalog.schema();
    for (std::size_t e = 0; e < spec.entries().size(); ++e) {
        const auto& entry = spec.entries()[e];
        int j = schema.feature_index(entry.feature);
        if (j < 0)
            throw std::invalid_argument("protected entry references unknown feature '" +
                                        entry.feature + "'");
        int v = schema.value_index(j, entry.value);
        if (v < 0)
            throw std::invalid_argument("protected entry references unknown value '" +
                                        entry.value + "' of feature '" + entry.feature + "'");
        for (int i = 0; i < catalog.item_count(); ++i) {
            if (catalog.item(i).holds(j, v)) {
                entry_flags_[e][i] = 1;
                protected_flags_[i] = 1;
            }
        }
    }
}

ExposureResult exposure(std::span<const int> items, const ExposureIndex& index) {
    if (items.empty())
        throw std::invalid_argument("exposure: empty list");

    ExposureResult result;
    result.per_value.assign(index.entry_count(), 0.0);
    int protected_count = 0;
    for (int idx : items) {
        if (index.protected_item(idx)) ++protected_count;
        for (int e = 0; e < index.entry_count(); ++e)
            if (index.holds_entry(idx, e)) result.per_value[e] += 1.0;
    }
    const double len = static_cast<double>(items.size());
    result.fraction = protected_count / len;
    result.unprotected_fraction = 1.0 - result.fraction;
    for (double& f : result.per_value) f /= len;
    return result;
}

namespace {

TradeoffReport tradeoffs_from_curve(const std::string& algorithm, double baseline_ndcg,
                                    const std::vector<std::pair<double, double>>& curve,
                                    const std::vector<double>& loss_levels) {
    TradeoffReport report;
    report.algorithm = algorithm;
    report.baseline_ndcg = baseline_ndcg;
    for (double level : loss_levels) {
        TradeoffPoint point;
        point.loss_level = level;
        point.target_ndcg = (1.0 - level) * baseline_ndcg;

        for (std::size_t i = 0; i < curve.size() && !point.exposure; ++i) {
            if (curve[i].first == point.target_ndcg) {
                // A level landing exactly on a measured point reports that
                // point unchanged.
                point.exposure = curve[i].second;
                break;
            }
            if (i + 1 == curve.size()) break;
            const auto& [n0, e0] = curve[i];
            const auto& [n1, e1] = curve[i + 1];
            const double lo = std::min(n0, n1);
            const double hi = std::max(n0, n1);
            if (point.target_ndcg >= lo && point.target_ndcg <= hi && n0 != n1) {
                double t = (point.target_ndcg - n0) / (n1 - n0);
                if (t == 1.0)
                    point.exposure = e1;
                else
                    point.exposure = e0 + t * (e1 - e0);
            }
        }
        report.points.push_back(point);
    }
    return report;
}

} // namespace

TradeoffReport tradeoff_table(const std::vector<MetricsRow>& rows_by_lambda,
                              const std::vector<double>& loss_levels) {
    if (rows_by_lambda.size() < 2)
        throw std::invalid_argument("tradeoff_table: need at least two measured rows");
    for (std::size_t i = 1; i < rows_by_lambda.size(); ++i)
        if (!(rows_by_lambda[i - 1].lambda < rows_by_lambda[i].lambda))
            throw std::invalid_argument("tradeoff_table: rows must be ordered by ascending lambda");

    const MetricsRow* baseline = nullptr;
    for (const auto& row : rows_by_lambda)
        if (row.lambda == 1.0 || row.algorithm == "none") baseline = &row;
    if (baseline == nullptr)
        throw std::invalid_argument("tradeoff_table: no baseline row (lambda = 1 or none)");

    // Walk the curve from lambda = 1 downward.
    std::vector<std::pair<double, double>> curve; // (ndcg, exposure)
    for (auto it = rows_by_lambda.rbegin(); it != rows_by_lambda.rend(); ++it)
        curve.emplace_back(it->ndcg, it->exposure);

    return tradeoffs_from_curve(rows_by_lambda.back().algorithm, baseline->ndcg, curve,
                                loss_levels);
}

MetricsRow evaluate_lists(const std::vector<RerankedList>& lists,
                          const std::vector<std::unordered_set<int>>& relevant_by_user,
                          int k_prime, const ItemCatalog& catalog, const ExposureIndex& index,
                          const std::string& algorithm_tag, double lambda) {
    MetricsRow row;
    row.algorithm = algorithm_tag;
    row.lambda = lambda;
    row.per_value_exposure.assign(index.entry_count(), 0.0);

    double precision_sum = 0.0, recall_sum = 0.0, ndcg_sum = 0.0;
    double ild_sum = 0.0, entropy_sum = 0.0, exposure_sum = 0.0;
    int accuracy_users = 0;
    int list_users = 0;

    std::vector<int> ranked;
    for (const auto& list : lists) {
        if (list.items.empty()) continue;
        ranked.clear();
        for (const auto& [item, score] : list.items) ranked.push_back(item);

        const auto& relevant = relevant_by_user[list.user];
        if (!relevant.empty()) {
            auto [p, r] = precision_recall_at(ranked, relevant, k_prime);
            precision_sum += p;
            recall_sum += r;
            ndcg_sum += ndcg_at(ranked, relevant, k_prime);
            ++accuracy_users;
        }

        ild_sum += intra_list_distance(ranked, catalog);
        entropy_sum += list_entropy(ranked, catalog);
        ExposureResult exp = exposure(ranked, index);
        exposure_sum += exp.fraction;
        for (int e = 0; e < index.entry_count(); ++e)
            row.per_value_exposure[e] += exp.per_value[e];
        ++list_users;
    }

    if (accuracy_users > 0) {
        row.precision = precision_sum / accuracy_users;
        row.recall = recall_sum / accuracy_users;
        row.ndcg = ndcg_sum / accuracy_users;
    }
    if (list_users > 0) {
        row.ild = ild_sum / list_users;
        row.entropy = entropy_sum / list_users;
        row.exposure = exposure_sum / list_users;
        for (double& f : row.per_value_exposure) f /= list_users;
    }
    return row;
}

} // namespace fairrank
