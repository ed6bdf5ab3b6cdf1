#include "mrw/synthgen.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include "mrw/errors.hpp"
#include "mrw/random.hpp"

namespace mrw {

namespace {

// Stream ids keep the Gaussian and log-normal factors on separate engines.
constexpr std::uint64_t kStreamEps = 1;
constexpr std::uint64_t kStreamOmega = 2;

const CascadeParams& uni_params(const GeneratorSpec& spec) {
    const auto* p = std::get_if<CascadeParams>(&spec.params);
    if (p == nullptr) throw Error(ErrorKind::InvalidParams, "generator needs CascadeParams");
    return *p;
}

const BiCascadeParams& bi_params(const GeneratorSpec& spec) {
    const auto* p = std::get_if<BiCascadeParams>(&spec.params);
    if (p == nullptr) throw Error(ErrorKind::InvalidParams, "generator needs BiCascadeParams");
    return *p;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

// Stationary Gaussian sequence with covariance cov[tau] (tau = 0..n-1) by
// circulant embedding of size m >= 2 (n - 1).
std::vector<double> circulant_gaussian(const std::vector<double>& cov, std::size_t n, Engine& eng) {
    const std::size_t m = next_pow2(2 * (n - 1));
    std::unique_ptr<fftw_complex[], FftwFree> buf(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m)));
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t tau = std::min(j, m - j);
        buf[j][0] = tau < cov.size() ? cov[tau] : 0.0;
        buf[j][1] = 0.0;
    }
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(m), buf.get(), buf.get(), FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    auto destroy = [&plan] {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    };
    fftw_execute(plan);

    std::vector<double> eig(m);
    double max_eig = 0.0;
    double min_eig = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        eig[j] = buf[j][0];
        max_eig = std::max(max_eig, eig[j]);
        min_eig = std::min(min_eig, eig[j]);
    }
    if (min_eig < -1e-8 * std::max(max_eig, 1.0)) {
        destroy();
        throw Error(ErrorKind::GeneratorConfig,
                    "circulant embedding is not positive semidefinite (min eigenvalue " +
                        std::to_string(min_eig) + "); try a larger n, e.g. n >= " +
                        std::to_string(4 * m));
    }

    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < m; ++j) {
        const double scale = std::sqrt(std::max(eig[j], 0.0) / static_cast<double>(m));
        buf[j][0] = scale * normal(eng);
        buf[j][1] = scale * normal(eng);
    }
    fftw_execute(plan);
    destroy();

    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = buf[t][0];
    return out;
}

}  // namespace

void GeneratorSpec::validate() const {
    if (n < 1) throw Error(ErrorKind::InvalidParams, "generator needs n >= 1");
    switch (kind) {
        case GeneratorKind::UniCascade:
            uni_params(*this).validate();
            break;
        case GeneratorKind::BiCascade:
            bi_params(*this).validate();
            break;
        case GeneratorKind::MrwPath:
            uni_params(*this).validate();
            if (n < 2) throw Error(ErrorKind::InvalidParams, "mrw-path needs n >= 2");
            if (!(decorrelation_length > 1.0)) {
                throw Error(ErrorKind::InvalidParams, "mrw-path needs decorrelation length L > 1");
            }
            break;
    }
}

std::vector<double> gen_cascade(const GeneratorSpec& spec) {
    if (spec.kind != GeneratorKind::UniCascade) {
        throw Error(ErrorKind::InvalidParams, "gen_cascade needs a uni-cascade spec");
    }
    spec.validate();
    const CascadeParams& p = uni_params(spec);
    Engine eps_eng = make_engine(spec.seed, kStreamEps);
    Engine omega_eng = make_engine(spec.seed, kStreamOmega);
    std::normal_distribution<double> eps(0.0, p.sigma);
    std::normal_distribution<double> omega(-p.lambda2, std::sqrt(p.lambda2));
    std::vector<double> out(spec.n);
    for (double& x : out) {
        const double e = eps(eps_eng);
        x = p.lambda2 > 0.0 ? e * std::exp(omega(omega_eng)) : e;
    }
    return out;
}

std::vector<double> gen_cascade(const CascadeParams& p, std::size_t n, std::uint64_t seed) {
    return gen_cascade(GeneratorSpec{GeneratorKind::UniCascade, p, n, seed, 0.0});
}

SamplePairs gen_bicascade(const GeneratorSpec& spec) {
    if (spec.kind != GeneratorKind::BiCascade) {
        throw Error(ErrorKind::InvalidParams, "gen_bicascade needs a bi-cascade spec");
    }
    spec.validate();
    const BiCascadeParams& p = bi_params(spec);
    const double l11 = std::sqrt(p.lambda2_1);
    const double l21 = l11 > 0.0 ? p.Lambda / l11 : 0.0;
    const double l22 = std::sqrt(std::max(p.lambda2_2 - l21 * l21, 0.0));
    const double rc = std::sqrt(1.0 - p.rho_eps * p.rho_eps);

    Engine eps_eng = make_engine(spec.seed, kStreamEps);
    Engine omega_eng = make_engine(spec.seed, kStreamOmega);
    std::normal_distribution<double> normal;
    SamplePairs out;
    out.x1.resize(spec.n);
    out.x2.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double z1 = normal(eps_eng);
        const double z2 = normal(eps_eng);
        const double u = normal(omega_eng);
        const double v = normal(omega_eng);
        const double e1 = p.sigma1 * z1;
        const double e2 = p.sigma2 * (p.rho_eps * z1 + rc * z2);
        const double w1 = -p.lambda2_1 + l11 * u;
        const double w2 = -p.lambda2_2 + l21 * u + l22 * v;
        out.x1[i] = e1 * std::exp(w1);
        out.x2[i] = e2 * std::exp(w2);
    }
    return out;
}

SamplePairs gen_bicascade(const BiCascadeParams& p, std::size_t n, std::uint64_t seed) {
    return gen_bicascade(GeneratorSpec{GeneratorKind::BiCascade, p, n, seed, 0.0});
}

SeriesRecord gen_mrw_path(const GeneratorSpec& spec, MonthIndex start) {
    if (spec.kind != GeneratorKind::MrwPath) {
        throw Error(ErrorKind::InvalidParams, "gen_mrw_path needs an mrw-path spec");
    }
    spec.validate();
    const CascadeParams& p = uni_params(spec);
    const std::size_t steps = spec.n - 1;

    Engine eps_eng = make_engine(spec.seed, kStreamEps);
    Engine omega_eng = make_engine(spec.seed, kStreamOmega);
    std::normal_distribution<double> eps(0.0, p.sigma);

    std::vector<double> omega(steps, 0.0);
    if (p.lambda2 > 0.0 && steps > 1) {
        const double L = spec.decorrelation_length;
        std::vector<double> cov;
        for (std::size_t tau = 0; tau < steps && static_cast<double>(tau) < L; ++tau) {
            cov.push_back(p.lambda2 * std::log(L / (1.0 + static_cast<double>(tau))));
        }
        omega = circulant_gaussian(cov, steps, omega_eng);
    } else if (p.lambda2 > 0.0) {
        std::normal_distribution<double> one(0.0, std::sqrt(p.lambda2 * std::log(spec.decorrelation_length)));
        omega[0] = one(omega_eng);
    }

    std::vector<double> dx(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const double e = eps(eps_eng);
        dx[t] = p.lambda2 > 0.0 ? e * std::exp(-p.lambda2 + omega[t]) : e;
    }
    std::vector<MonthIndex> ts(spec.n);
    for (std::size_t t = 0; t < spec.n; ++t) ts[t] = start + static_cast<MonthIndex>(t);
    return SeriesRecord("mrw-path", std::move(ts), integrate_path(dx));
}

std::vector<double> integrate_path(const std::vector<double>& steps) {
    std::vector<double> x(steps.size() + 1, 0.0);
    for (std::size_t t = 0; t < steps.size(); ++t) x[t + 1] = x[t] + steps[t];
    return x;
}

}  // namespace mrw
