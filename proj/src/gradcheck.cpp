#include "crosstrack/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "crosstrack/assignment.hpp"
#include "crosstrack/objective.hpp"
#include "crosstrack/rng.hpp"

namespace crosstrack {

std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> x, double h) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f(x);
        x[i] = saved - h;
        const double fm = f(x);
        x[i] = saved;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double gradient_rel_error(const std::vector<double>& analytic,
                          const std::vector<double>& numeric) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        diff += d * d;
        na += analytic[i] * analytic[i];
        nb += numeric[i] * numeric[i];
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-10});
    return std::sqrt(diff) / denom;
}

namespace {

constexpr double kTolerance = 1e-4;

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * gaussian(rng);
    return m;
}

// Random binary target with >= 1 positive and at most one per row/column.
AffinityTarget random_target(Rng& rng, std::size_t rows, std::size_t cols) {
    AffinityTarget target;
    target.y = Matrix(rows, cols, 0.0);
    std::vector<std::size_t> ri(rows), ci(cols);
    for (std::size_t i = 0; i < rows; ++i) ri[i] = i;
    for (std::size_t j = 0; j < cols; ++j) ci[j] = j;
    shuffle(rng, ri);
    shuffle(rng, ci);
    const std::size_t max_pos = std::min(rows, cols);
    const std::size_t n_pos = 1 + uniform_index(rng, max_pos);
    for (std::size_t k = 0; k < n_pos; ++k) {
        target.y.at(ri[k], ci[k]) = 1.0;
    }
    return target;
}

void tally(GradCheckReport& report, double rel) {
    ++report.instances;
    report.worst_rel_error = std::max(report.worst_rel_error, rel);
    if (!(rel <= kTolerance)) ++report.failures;
}

} // namespace

GradCheckReport check_cross_softmax_grad(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    GradCheckReport report;
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t rows = 1 + uniform_index(rng, 8);
        const std::size_t cols = 1 + uniform_index(rng, 8);
        const Matrix r = random_matrix(rng, rows, cols, 1.5);
        const Matrix da = random_matrix(rng, rows, cols, 1.0);

        const Matrix analytic = cross_softmax_grad(r, da);
        auto scalar = [&](const std::vector<double>& flat) {
            Matrix m(rows, cols);
            m.data = flat;
            const AffinityMatrix a = cross_softmax(m);
            double s = 0.0;
            for (std::size_t i = 0; i < a.inner.data.size(); ++i) {
                s += da.data[i] * a.inner.data[i];
            }
            return s;
        };
        const std::vector<double> numeric = finite_difference(scalar, r.data);
        tally(report, gradient_rel_error(analytic.data, numeric));
    }
    return report;
}

GradCheckReport check_fast_focal_grad(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    GradCheckReport report;
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t rows = 1 + uniform_index(rng, 8);
        const std::size_t cols = 1 + uniform_index(rng, 8);
        const AffinityTarget target = random_target(rng, rows, cols);
        // Stay inside the clamp range; finite differences are meaningless
        // on the flat clamped region.
        Matrix a(rows, cols);
        for (double& v : a.data) v = uniform(rng, 0.05, 0.95);

        const Matrix analytic = fast_focal_grad(AffinityMatrix{a}, target);
        auto scalar = [&](const std::vector<double>& flat) {
            Matrix m(rows, cols);
            m.data = flat;
            return fast_focal(AffinityMatrix{m}, target);
        };
        const std::vector<double> numeric = finite_difference(scalar, a.data);
        tally(report, gradient_rel_error(analytic.data, numeric));
    }
    return report;
}

GradCheckReport check_composed_grad(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    GradCheckReport report;
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t rows = 1 + uniform_index(rng, 8);
        const std::size_t cols = 1 + uniform_index(rng, 8);
        const Matrix r = random_matrix(rng, rows, cols, 1.5);
        const AffinityTarget target = random_target(rng, rows, cols);

        const AffinityMatrix a = cross_softmax(r);
        const Matrix da = fast_focal_grad(a, target);
        const Matrix analytic = cross_softmax_grad(r, da);
        auto scalar = [&](const std::vector<double>& flat) {
            Matrix m(rows, cols);
            m.data = flat;
            return fast_focal(cross_softmax(m), target);
        };
        const std::vector<double> numeric = finite_difference(scalar, r.data);
        tally(report, gradient_rel_error(analytic.data, numeric));
    }
    return report;
}

GradCheckReport check_loss_balance_grad(std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    GradCheckReport report;
    for (std::size_t t = 0; t < instances; ++t) {
        LossWeights w;
        w.epsilon_trk = uniform(rng, -2.0, 2.0);
        const double l_prev = uniform(rng, 0.0, 3.0);
        const double l_t = uniform(rng, 0.0, 3.0);
        const double l_ref = uniform(rng, 0.0, 3.0);
        const double l_trk = uniform(rng, 0.0, 3.0);

        const double analytic = -std::exp(-w.epsilon_trk) * l_trk + 1.0;
        auto scalar = [&](const std::vector<double>& eps) {
            LossWeights lw = w;
            lw.epsilon_trk = eps[0];
            return total_loss(l_prev, l_t, l_ref, l_trk, lw);
        };
        const std::vector<double> numeric = finite_difference(scalar, {w.epsilon_trk});
        tally(report, gradient_rel_error({analytic}, numeric));
    }
    return report;
}

bool run_all_gradchecks(std::uint64_t seed, std::ostream& log) {
    struct Suite {
        const char* name;
        GradCheckReport (*run)(std::uint64_t, std::size_t);
    };
    const Suite suites[] = {
        {"cross_softmax_grad", [](std::uint64_t s, std::size_t n) { return check_cross_softmax_grad(s, n); }},
        {"fast_focal_grad", [](std::uint64_t s, std::size_t n) { return check_fast_focal_grad(s, n); }},
        {"composed_grad", [](std::uint64_t s, std::size_t n) { return check_composed_grad(s, n); }},
        {"loss_balance_grad", [](std::uint64_t s, std::size_t n) { return check_loss_balance_grad(s, n); }},
    };
    bool ok = true;
    for (const Suite& suite : suites) {
        const GradCheckReport r = suite.run(seed, 100);
        log << suite.name << ": " << (r.passed() ? "pass" : "FAIL") << " ("
            << r.instances << " instances, worst rel error " << r.worst_rel_error
            << ")\n";
        ok = ok && r.passed();
    }
    return ok;
}

} // namespace crosstrack
