#include "fairrank/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairrank/csv.hpp"
#include "fairrank/rng.hpp"

namespace fairrank {

namespace {

// Guard against zero denominators in the multiplicative updates.
constexpr double kDivGuard = 1e-12;

double observed_squared_error(const FactorModel& model, const std::vector<Interactions::Row>& rows) {
    double err = 0.0;
    for (const auto& row : rows) {
        if (row.split != Split::train) continue;
        double d = row.rating - model.score(row.user, row.item);
        err += d * d;
    }
    return err;
}

} // namespace

FactorModel train_nmf(const Interactions& interactions, const ItemCatalog& catalog,
                      const NmfConfig& config) {
    if (config.rank <= 0)
        throw std::invalid_argument("train_nmf: rank must be positive");

    const auto& rows = interactions.rows();
    double rating_sum = 0.0;
    std::size_t train_count = 0;
    for (const auto& row : rows) {
        if (row.split != Split::train) continue;
        rating_sum += row.rating;
        ++train_count;
    }
    if (train_count == 0)
        throw std::invalid_argument("train_nmf: empty train split");
    const double mean_rating = rating_sum / static_cast<double>(train_count);

    const int n = interactions.user_count();
    const int m = catalog.item_count();
    const int r = config.rank;
    FactorModel model(n, m, r);

    Rng rng(config.seed);
    for (int u = 0; u < n; ++u) {
        double* w = model.user_row(u);
        for (int f = 0; f < r; ++f) w[f] = rng.next_double_open_low() * mean_rating;
    }
    for (int i = 0; i < m; ++i) {
        double* h = model.item_row(i);
        for (int f = 0; f < r; ++f) h[f] = rng.next_double_open_low() * mean_rating;
    }

    // Observed-entry multiplicative updates:
    //   W_uf *= sum_i R_ui H_if / (sum_i P_ui H_if + guard)   over i observed for u
    //   H_if *= sum_u R_ui W_uf / (sum_u P_ui W_uf + guard)   over u observed for i
    std::vector<double> num(static_cast<std::size_t>(std::max(n, m)) * r);
    std::vector<double> den(static_cast<std::size_t>(std::max(n, m)) * r);

    auto half_step = [&](bool update_users) {
        const std::size_t rows_len = static_cast<std::size_t>(update_users ? n : m) * r;
        std::fill(num.begin(), num.begin() + rows_len, 0.0);
        std::fill(den.begin(), den.begin() + rows_len, 0.0);
        for (const auto& row : rows) {
            if (row.split != Split::train) continue;
            const double pred = model.score(row.user, row.item);
            const int target = update_users ? row.user : row.item;
            const double* other =
                update_users ? model.item_row(row.item) : model.user_row(row.user);
            double* nrow = num.data() + static_cast<std::size_t>(target) * r;
            double* drow = den.data() + static_cast<std::size_t>(target) * r;
            for (int f = 0; f < r; ++f) {
                nrow[f] += row.rating * other[f];
                drow[f] += pred * other[f];
            }
        }
        const int count = update_users ? n : m;
        for (int t = 0; t < count; ++t) {
            double* factors = update_users ? model.user_row(t) : model.item_row(t);
            const double* nrow = num.data() + static_cast<std::size_t>(t) * r;
            const double* drow = den.data() + static_cast<std::size_t>(t) * r;
            for (int f = 0; f < r; ++f) factors[f] *= nrow[f] / (drow[f] + kDivGuard);
        }
    };

    model.objective_trace().reserve(config.epochs);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        half_step(true);
        half_step(false);
        model.objective_trace().push_back(observed_squared_error(model, rows));
    }
    return model;
}

CandidateList top_k(const FactorModel& model, const Interactions& interactions,
                    const ItemCatalog& catalog, int user, int k) {
    if (user < 0 || user >= interactions.user_count())
        throw std::invalid_argument("top_k: unknown user index");
    if (k <= 0)
        throw std::invalid_argument("top_k: k must be positive");

    const auto& train = interactions.profile(user, Split::train);
    CandidateList list;
    list.user = user;
    list.items.reserve(catalog.item_count());
    for (int i = 0; i < catalog.item_count(); ++i) {
        if (std::binary_search(train.begin(), train.end(), i)) continue;
        list.items.emplace_back(i, model.score(user, i));
    }
    std::sort(list.items.begin(), list.items.end(),
              [&](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return catalog.item_id(a.first) < catalog.item_id(b.first);
              });
    if (static_cast<int>(list.items.size()) > k) {
        list.items.resize(k);
    } else if (static_cast<int>(list.items.size()) < k) {
        list.truncated = true;
    }
    return list;
}

std::vector<CandidateList> load_scores(const std::filesystem::path& path,
                                       const ItemCatalog& catalog,
                                       const Interactions& interactions) {
    CsvTable table = read_csv(path);
    if (table.columns.empty() && table.rows.empty())
        return {};
    int user_col = table.require_column("user_id");
    int item_col = table.require_column("item_id");
    int score_col = table.require_column("score");

    std::vector<CandidateList> lists(interactions.user_count());
    for (int u = 0; u < interactions.user_count(); ++u) lists[u].user = u;

    std::set<std::pair<int, int>> seen;
    for (const auto& row : table.rows) {
        int u = interactions.user_index(row[user_col]);
        int i = catalog.index_of(row[item_col]);
        if (!seen.insert({u, i}).second)
            throw std::runtime_error(path.string() + ": duplicate score row (" + row[user_col] +
                                     ", " + row[item_col] + ")");
        double score;
        try {
            score = std::stod(row[score_col]);
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ": bad score '" + row[score_col] + "' for (" +
                                     row[user_col] + ", " + row[item_col] + ")");
        }
        lists[u].items.emplace_back(i, score);
    }
    for (auto& list : lists) {
        std::sort(list.items.begin(), list.items.end(),
                  [&](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return catalog.item_id(a.first) < catalog.item_id(b.first);
                  });
    }
    return lists;
}

std::vector<InteractionRecord> split_interactions(std::vector<InteractionRecord> records,
                                                  double test_fraction, std::uint64_t seed,
                                                  bool stratified) {
    if (test_fraction < 0.0 || test_fraction >= 1.0)
        throw std::invalid_argument("split_interactions: test fraction must be in [0, 1)");

    Rng rng(seed);
    if (!stratified) {
        for (auto& rec : records)
            rec.split = rng.next_double() < test_fraction ? Split::test : Split::train;
        return records;
    }

    // Per-user holdout: floor(fraction * count) interactions move to test.
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t idx = 0; idx < records.size(); ++idx)
        by_user[records[idx].user_id].push_back(idx);
    for (auto& [user, indices] : by_user) {
        for (std::size_t i = indices.size(); i > 1; --i)
            std::swap(indices[i - 1], indices[rng.below(i)]);
        std::size_t n_test =
            static_cast<std::size_t>(test_fraction * static_cast<double>(indices.size()));
        for (std::size_t i = 0; i < indices.size(); ++i)
            records[indices[i]].split = i < n_test ? Split::test : Split::train;
    }
    return records;
}

void write_factors_csv(const std::filesystem::path& user_path,
                       const std::filesystem::path& item_path, const FactorModel& model,
                       const Interactions& interactions, const ItemCatalog& catalog) {
    CsvTable users;
    users.columns = {"user_id"};
    for (int f = 0; f < model.rank(); ++f) users.columns.push_back("f" + std::to_string(f));
    for (int u = 0; u < model.user_count(); ++u) {
        std::vector<std::string> row = {interactions.user_id(u)};
        const double* w = model.user_row(u);
        for (int f = 0; f < model.rank(); ++f) row.push_back(format_double(w[f]));
        users.rows.push_back(std::move(row));
    }
    write_csv(user_path, users);

    CsvTable items;
    items.columns = {"item_id"};
    for (int f = 0; f < model.rank(); ++f) items.columns.push_back("f" + std::to_string(f));
    for (int i = 0; i < model.item_count(); ++i) {
        std::vector<std::string> row = {catalog.item_id(i)};
        const double* h = model.item_row(i);
        for (int f = 0; f < model.rank(); ++f) row.push_back(format_double(h[f]));
        items.rows.push_back(std::move(row));
    }
    write_csv(item_path, items);
}

} // namespace fairrank
