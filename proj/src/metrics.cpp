#include "tsgan/metrics.hpp"
#include "tsgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tsgan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cumulative cost table, (n+1) x (m+1) with an infinite border.
Matrix accumulate(const Series& q, const Series& c, const DtwOptions& options) {
    if (q.empty() || c.empty()) throw ArgumentError("dtw: both series must be non-empty");
    const auto n = q.size();
    const auto m = c.size();
    std::size_t width = std::max(n, m);
    if (options.band) width = std::max(*options.band, n > m ? n - m : m - n);

    Matrix acc = Matrix::Constant(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(m + 1), kInf);
    acc(0, 0) = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t lo = i > width ? i - width : 1;
        const std::size_t hi = std::min(m, i + width);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double d = q[i - 1] - c[j - 1];
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            const double best = std::min({acc(ii - 1, jj - 1), acc(ii - 1, jj), acc(ii, jj - 1)});
            acc(ii, jj) = best + d * d;
        }
    }
    return acc;
}

} // namespace

DtwResult dtw(const Series& q, const Series& c, const DtwOptions& options) {
    const Matrix acc = accumulate(q, c, options);
    Eigen::Index i = acc.rows() - 1;
    Eigen::Index j = acc.cols() - 1;

    DtwResult out;
    out.distance = std::sqrt(acc(i, j));
    while (true) {
        out.path.emplace_back(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
        if (i == 1 && j == 1) break;
        const double diag = acc(i - 1, j - 1);
        const double up = acc(i - 1, j);
        const double left = acc(i, j - 1);
        if (diag <= up && diag <= left) {
            --i;
            --j;
        } else if (up <= left) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(out.path.begin(), out.path.end());
    return out;
}

double dtw_distance(const Series& q, const Series& c, const DtwOptions& options) {
    const Matrix acc = accumulate(q, c, options);
    return std::sqrt(acc(acc.rows() - 1, acc.cols() - 1));
}

double euclidean_distance(const Series& a, const Series& b) {
    if (a.size() != b.size()) throw ShapeError("euclidean_distance: lengths differ");
    double sum = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) sum += (a[t] - b[t]) * (a[t] - b[t]);
    return std::sqrt(sum);
}

namespace {

std::vector<std::size_t> draw(std::size_t size, std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(n);
    return idx;
}

} // namespace

SimilarityReport average_similarity(const std::vector<Series>& group_a,
                                    const std::vector<Series>* group_b, std::size_t n, Rng& rng,
                                    std::string name_a, std::string name_b) {
    if (n == 0) throw ArgumentError("average_similarity: n must be >= 1");
    if (n > group_a.size() || (group_b && n > group_b->size()))
        throw ArgumentError("average_similarity: n=" + std::to_string(n) +
                            " exceeds the size of a group");
    if (!group_b && n < 2) throw ArgumentError("average_similarity: within-group needs n >= 2");

    const auto pick_a = draw(group_a.size(), n, rng);
    std::vector<double> distances;
    if (group_b) {
        const auto pick_b = draw(group_b->size(), n, rng);
        distances.reserve(n * n);
        for (auto a : pick_a)
            for (auto b : pick_b) distances.push_back(dtw_distance(group_a[a], (*group_b)[b]));
    } else {
        distances.reserve(n * (n - 1) / 2);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = x + 1; y < n; ++y)
                distances.push_back(dtw_distance(group_a[pick_a[x]], group_a[pick_a[y]]));
    }

    SimilarityReport r;
    r.group_a = std::move(name_a);
    r.group_b = name_b.empty() && !group_b ? r.group_a : std::move(name_b);
    r.n = n;
    r.pair_count = distances.size();
    r.mean = std::accumulate(distances.begin(), distances.end(), 0.0) /
             static_cast<double>(distances.size());
    double ss = 0.0;
    for (double d : distances) ss += (d - r.mean) * (d - r.mean);
    r.std_dev = std::sqrt(ss / static_cast<double>(distances.size()));
    return r;
}

std::string similarity_csv(const std::vector<SimilarityReport>& reports) {
    std::ostringstream os;
    os.precision(17);
    os << "group_a,group_b,n,mean,std\n";
    for (const auto& r : reports)
        os << r.group_a << ',' << r.group_b << ',' << r.n << ',' << r.mean << ',' << r.std_dev << '\n';
    return os.str();
}

KMedoidsResult k_medoids(const std::vector<Series>& set, std::size_t k, DistanceKind distance) {
    const std::size_t n = set.size();
    if (k == 0 || k > n)
        throw ArgumentError("k_medoids: k=" + std::to_string(k) + " must lie in 1.." +
                            std::to_string(n));

    Matrix dist = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d = distance == DistanceKind::dtw ? dtw_distance(set[a], set[b])
                                                           : euclidean_distance(set[a], set[b]);
            dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = d;
            dist(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = d;
        }
    auto d = [&](std::size_t a, std::size_t b) {
        return dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    };

    auto total_cost = [&](const std::vector<std::size_t>& medoids) {
        double cost = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            double best = kInf;
            for (auto m : medoids) best = std::min(best, d(p, m));
            cost += best;
        }
        return cost;
    };

    // BUILD: greedily add the point that lowers the cost the most.
    std::vector<std::size_t> medoids;
    std::vector<bool> is_medoid(n, false);
    while (medoids.size() < k) {
        std::size_t best_point = n;
        double best_cost = kInf;
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (is_medoid[cand]) continue;
            medoids.push_back(cand);
            const double cost = total_cost(medoids);
            medoids.pop_back();
            if (cost < best_cost) {
                best_cost = cost;
                best_point = cand;
            }
        }
        medoids.push_back(best_point);
        is_medoid[best_point] = true;
    }

    KMedoidsResult out;
    double cost = total_cost(medoids);
    out.cost_history.push_back(cost);

    // SWAP until no exchange strictly lowers the cost.
    while (true) {
        double best_cost = cost;
        std::size_t best_slot = k, best_point = n;
        for (std::size_t slot = 0; slot < k; ++slot) {
            for (std::size_t cand = 0; cand < n; ++cand) {
                if (is_medoid[cand]) continue;
                auto trial = medoids;
                trial[slot] = cand;
                const double c = total_cost(trial);
                if (c < best_cost - 1e-12 * std::max(1.0, std::abs(best_cost))) {
                    best_cost = c;
                    best_slot = slot;
                    best_point = cand;
                }
            }
        }
        if (best_slot == k) break;
        is_medoid[medoids[best_slot]] = false;
        is_medoid[best_point] = true;
        medoids[best_slot] = best_point;
        cost = best_cost;
        out.cost_history.push_back(cost);
    }

    out.medoids = medoids;
    out.cost = cost;
    out.assignment.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t best = 0;
        for (std::size_t s = 1; s < k; ++s)
            if (d(p, medoids[s]) < d(p, medoids[best])) best = s;
        out.assignment[p] = best;
    }
    return out;
}

std::size_t nearest_generated(const Series& example, const std::vector<Series>& generated) {
    if (generated.empty()) throw ArgumentError("nearest_generated: generated set is empty");
    std::size_t best = 0;
    double best_distance = dtw_distance(example, generated[0]);
    for (std::size_t i = 1; i < generated.size(); ++i) {
        const double d = dtw_distance(example, generated[i]);
        if (d < best_distance) {
            best_distance = d;
            best = i;
        }
    }
    return best;
}

} // namespace tsgan
