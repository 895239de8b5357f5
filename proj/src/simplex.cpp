#include "gwf/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gwf/errors.hpp"

namespace gwf::simplex {
namespace {

class Counter {
public:
    Counter(const Objective& f, std::size_t budget) : f_(f), budget_(budget) {}

    double operator()(const std::vector<double>& x) {
        ++evals_;
        const double v = f_(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }
    bool exhausted() const { return evals_ >= budget_; }
    std::size_t evals() const { return evals_; }

private:
    const Objective& f_;
    std::size_t budget_;
    std::size_t evals_ = 0;
};

struct Run {
    std::vector<double> x;
    double f;
    bool converged;
};

Run nelder_mead(Counter& eval, const std::vector<double>& x0, double f0, const std::vector<double>& step,
                double ftol, std::vector<double>& trace) {
    const std::size_t n = x0.size();
    const double dn = double(n);
    const double alpha = 1.0;
    const double gamma = n > 1 ? 1.0 + 2.0 / dn : 2.0;
    const double rho = n > 1 ? 0.75 - 0.5 / dn : 0.5;
    const double shrink = n > 1 ? 1.0 - 1.0 / dn : 0.5;

    std::vector<std::vector<double>> v(n + 1, x0);
    std::vector<double> fv(n + 1, f0);
    for (std::size_t i = 0; i < n; ++i) {
        v[i + 1][i] += step[i];
        fv[i + 1] = eval(v[i + 1]);
    }
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto point = [&](double t, const std::vector<double>& worst, std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (centroid[j] - worst[j]);
    };

    double checkpoint = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;
    bool converged = false;
    while (!eval.exhausted()) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        trace.push_back(fv[best]);
        if (iter % (n + 1) == 0) {
            if (checkpoint - fv[best] < ftol) {
                converged = true;
                break;
            }
            checkpoint = fv[best];
        }
        ++iter;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += v[i][j];
        for (auto& c : centroid) c /= dn;

        point(alpha, v[worst], xr);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            point(alpha * gamma, v[worst], xe);
            const double fe = eval(xe);
            if (fe < fr) {
                v[worst] = xe;
                fv[worst] = fe;
            } else {
                v[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            v[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        point(outside ? alpha * rho : -rho, v[worst], xc);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            v[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) v[i][j] = v[best][j] + shrink * (v[i][j] - v[best][j]);
            fv[i] = eval(v[i]);
        }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    return {v[std::size_t(it - fv.begin())], *it, converged};
}

}  // namespace

Result minimize(const Objective& f, std::vector<double> x0, std::vector<double> step, const Options& options) {
    const std::size_t n = x0.size();
    if (n == 0 || step.size() != n) throw InvalidInput("simplex: start point and step sizes must be non-empty and match");
    const std::size_t budget = options.max_evals ? options.max_evals : 500 * n;
    Counter eval(f, budget);
    Result out;
    out.x = std::move(x0);
    out.f = eval(out.x);
    out.trace.push_back(out.f);

    std::mt19937_64 rng(options.seed);
    for (int run = 0; run <= options.restarts && !eval.exhausted(); ++run) {
        std::vector<double> s = step;
        if (run > 0) {
            // Reseeded restart: random sign and a modest random scale per edge.
            for (auto& e : s) {
                const auto bits = rng();
                const double scale = 0.5 + double(bits >> 11) * 0x1.0p-53;
                e *= (bits & 1u) ? scale : -scale;
            }
        }
        const double before = out.f;
        auto r = nelder_mead(eval, out.x, out.f, s, options.ftol, out.trace);
        if (r.f < out.f) {
            out.x = std::move(r.x);
            out.f = r.f;
        }
        out.converged = r.converged;
        if (run > 0 && before - out.f < options.ftol) break;
    }
    out.evals = eval.evals();
    return out;
}

}  // namespace gwf::simplex
