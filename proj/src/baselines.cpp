#include "cgm/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cgm/error.hpp"

namespace cgm {

double VariogramModel::operator()(double h) const {
    if (h <= 0.0) return 0.0;
    if (range <= 0.0) return nugget + sill;
    return nugget + sill * (1.0 - std::exp(-3.0 * h / range));
}

double idw_predict(const Scgm& scgm, Location q, double power) {
    if (scgm.empty()) throw Error(ErrorCode::empty_input, "IDW needs at least one sample");
    if (!(power > 0.0)) throw Error(ErrorCode::invalid_config, "IDW power must be positive");
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : scgm) {
        const double d = std::hypot(p.x - q.x, p.y - q.y);
        if (d < 1e-9) return p.gain_db;
        const double w = std::pow(d, -power);
        num += w * p.gain_db;
        den += w;
    }
    return num / den;
}

namespace {

struct LinearFit {
    double nugget = 0.0;
    double sill = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

// Weighted least squares for (nugget, sill) >= 0 at a fixed range.
LinearFit fit_at_range(const std::vector<LagBin>& bins, double range) {
    double sw = 0, sf = 0, sff = 0, sg = 0, sfg = 0;
    for (const auto& b : bins) {
        const double w = double(b.pairs);
        const double f = 1.0 - std::exp(-3.0 * b.mean_lag / range);
        sw += w;
        sf += w * f;
        sff += w * f * f;
        sg += w * b.gamma;
        sfg += w * f * b.gamma;
    }
    auto sse = [&](double n, double s) {
        double e = 0.0;
        for (const auto& b : bins) {
            const double r = b.gamma - n - s * (1.0 - std::exp(-3.0 * b.mean_lag / range));
            e += double(b.pairs) * r * r;
        }
        return e;
    };
    LinearFit best;
    auto consider = [&](double n, double s) {
        if (n < 0.0 || s < 0.0 || !std::isfinite(n) || !std::isfinite(s)) return;
        const double e = sse(n, s);
        if (e < best.sse) best = {n, s, e};
    };
    const double det = sw * sff - sf * sf;
    if (std::abs(det) > 1e-300) consider((sff * sg - sf * sfg) / det, (sw * sfg - sf * sg) / det);
    if (sff > 0.0) consider(0.0, sfg / sff);
    if (sw > 0.0) consider(sg / sw, 0.0);
    consider(0.0, 0.0);
    return best;
}

}  // namespace

VariogramFit fit_variogram(const Scgm& scgm, std::size_t n_lag_bins, std::optional<Bounds> bounds) {
    if (scgm.size() < 10) throw Error(ErrorCode::insufficient_data, "variogram fit needs >= 10 samples");
    if (n_lag_bins < 1) throw Error(ErrorCode::invalid_config, "n_lag_bins must be >= 1");
    double diag;
    if (bounds) {
        diag = std::hypot(bounds->width, bounds->height);
    } else {
        double x0 = scgm[0].x, x1 = x0, y0 = scgm[0].y, y1 = y0;
        for (const auto& p : scgm) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        diag = std::hypot(x1 - x0, y1 - y0);
    }
    const double max_lag = 0.5 * diag;
    if (!(max_lag > 0.0)) throw Error(ErrorCode::insufficient_data, "samples span no distance");
    const double width = max_lag / double(n_lag_bins);

    std::vector<double> lag_sum(n_lag_bins, 0.0), gamma_sum(n_lag_bins, 0.0);
    std::vector<std::size_t> count(n_lag_bins, 0);
    for (std::size_t i = 0; i < scgm.size(); ++i) {
        for (std::size_t j = i + 1; j < scgm.size(); ++j) {
            const double h = std::hypot(scgm[i].x - scgm[j].x, scgm[i].y - scgm[j].y);
            if (h > max_lag || h <= 0.0) continue;
            const auto b = std::min(static_cast<std::size_t>(h / width), n_lag_bins - 1);
            const double de = scgm[i].gain_db - scgm[j].gain_db;
            lag_sum[b] += h;
            gamma_sum[b] += 0.5 * de * de;
            ++count[b];
        }
    }
    VariogramFit fit;
    for (std::size_t b = 0; b < n_lag_bins; ++b)
        if (count[b] > 0) fit.bins.push_back({lag_sum[b] / double(count[b]), gamma_sum[b] / double(count[b]), count[b]});
    if (fit.bins.empty()) throw Error(ErrorCode::insufficient_data, "no sample pairs within the lag range");

    const bool flat = std::all_of(fit.bins.begin(), fit.bins.end(), [](const LagBin& b) { return b.gamma <= 0.0; });
    if (flat) {
        fit.degenerate = true;
        fit.model = {0.0, 0.0, max_lag};
        return fit;
    }

    // Coarse log-spaced search over the practical range.
    const std::size_t steps = 60;
    const double lo = std::log(0.25 * width);
    const double hi = std::log(3.0 * max_lag);
    std::vector<double> grid(steps);
    std::size_t best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < steps; ++s) {
        grid[s] = lo + (hi - lo) * double(s) / double(steps - 1);
        const double e = fit_at_range(fit.bins, std::exp(grid[s])).sse;
        if (e < best_sse) {
            best_sse = e;
            best = s;
        }
    }
    // Golden-section refinement between the neighbours of the coarse optimum.
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(best + 1, steps - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = fit_at_range(fit.bins, std::exp(c)).sse;
    double fd = fit_at_range(fit.bins, std::exp(d)).sse;
    for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = fit_at_range(fit.bins, std::exp(c)).sse;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = fit_at_range(fit.bins, std::exp(d)).sse;
        }
    }
    double range = std::exp(0.5 * (a + b));
    LinearFit lf = fit_at_range(fit.bins, range);
    if (best_sse < lf.sse) {
        range = std::exp(grid[best]);
        lf = fit_at_range(fit.bins, range);
    }
    fit.model = {lf.nugget, lf.sill, range};
    fit.degenerate = !(lf.sill > 0.0);
    return fit;
}

KrigingResult kriging_predict(const Scgm& scgm, const VariogramModel& vg, Location q, std::size_t neighborhood_size) {
    if (scgm.empty()) throw Error(ErrorCode::empty_input, "Kriging needs samples");
    if (neighborhood_size < 3) throw Error(ErrorCode::invalid_config, "neighborhood_size must be >= 3");
    const std::size_t n = std::min(neighborhood_size, scgm.size());

    std::vector<std::pair<double, std::size_t>> dist(scgm.size());
    for (std::size_t i = 0; i < scgm.size(); ++i)
        dist[i] = {std::hypot(scgm[i].x - q.x, scgm[i].y - q.y), i};
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n));

    KrigingResult r;
    r.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.neighbors[i] = dist[i].second;

    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& pi = scgm[r.neighbors[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto& pj = scgm[r.neighbors[static_cast<std::size_t>(j)]];
            a(i, j) = vg(std::hypot(pi.x - pj.x, pi.y - pj.y));
        }
        a(i, m) = 1.0;
        a(m, i) = 1.0;
        rhs(i) = vg(dist[static_cast<std::size_t>(i)].first);
    }
    a(m, m) = 0.0;
    rhs(m) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd sol;
    bool ok = lu.isInvertible();
    if (ok) {
        sol = lu.solve(rhs);
        const double resid = (a * sol - rhs).norm();
        ok = sol.allFinite() && resid <= 1e-8 * (1.0 + rhs.norm());
    }
    if (!ok) {
        Scgm local;
        local.reserve(n);
        for (auto i : r.neighbors) local.push_back(scgm[i]);
        r.value = idw_predict(local, q);
        r.idw_fallback = true;
        return r;
    }
    r.weights.resize(n);
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.weights[i] = sol(static_cast<Eigen::Index>(i));
        value += r.weights[i] * scgm[r.neighbors[i]].gain_db;
    }
    r.value = value;
    r.lagrange = sol(m);
    return r;
}

double nrmse(std::span<const double> predictions, std::span<const double> truths) {
    if (predictions.size() != truths.size() || truths.empty())
        throw Error(ErrorCode::length_mismatch, "predictions and truths must have equal length >= 1");
    const auto [lo, hi] = std::minmax_element(truths.begin(), truths.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw Error(ErrorCode::degenerate_range, "truth range is zero");
    double sse = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const double e = predictions[i] - truths[i];
        sse += e * e;
    }
    return std::sqrt(sse / double(truths.size())) / range;
}

}  // namespace cgm
