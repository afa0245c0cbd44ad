#include "sigloop/loops/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sigloop::loops {

namespace {

std::vector<double> blend(const std::vector<double>& a, const std::vector<double>& b,
                          double ta, double tb) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = ta * a[i] + tb * b[i];
    return out;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, double scale, double value_tol,
                             int max_iter) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(start);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = start;
        v[i] += scale;
        simplex.push_back(std::move(v));
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    NelderMeadResult result;
    for (result.iterations = 0; result.iterations < max_iter; ++result.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];
        if (values[worst] - values[best] < value_tol) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto reflected = blend(centroid, simplex[worst], 2.0, -1.0);
        const double fr = f(reflected);
        if (fr < values[best]) {
            auto expanded = blend(centroid, simplex[worst], 3.0, -2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                values[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second_worst]) {
            simplex[worst] = std::move(reflected);
            values[worst] = fr;
            continue;
        }
        auto contracted = blend(centroid, simplex[worst], 0.5, 0.5);
        const double fc = f(contracted);
        if (fc < values[worst]) {
            simplex[worst] = std::move(contracted);
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            simplex[i] = blend(simplex[best], simplex[i], 0.5, 0.5);
            values[i] = f(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (values[i] < values[best]) best = i;
    result.x = simplex[best];
    result.value = values[best];
    return result;
}

}  // namespace sigloop::loops
