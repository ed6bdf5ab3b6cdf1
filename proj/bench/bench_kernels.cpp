// OpenMP kernels against their serial references. Set OMP_NUM_THREADS to
// compare thread counts.
#include <benchmark/benchmark.h>

#include <omp.h>

#include <random>
#include <vector>

#include "mrw/kernels.hpp"
#include "mrw/random.hpp"

using namespace mrw;

namespace {

std::vector<double> centers(int bins) {
    std::vector<double> c(static_cast<std::size_t>(bins));
    const double w = 12.0 / bins;
    for (int k = 0; k < bins; ++k) c[static_cast<std::size_t>(k)] = -6.0 + (k + 0.5) * w;
    return c;
}

const BiCascadeParams kJoint{0.3, 0.2, 0.15, 0.4};

void BM_pdf1d_openmp(benchmark::State& st) {
    const auto x = centers(static_cast<int>(st.range(0)));
    const Mixture1D mix = cascade_mixture({0.3, 1.0});
    std::vector<double> out(x.size());
    for (auto _ : st) {
        kernels::mixture_pdf(mix, x, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_pdf1d_serial(benchmark::State& st) {
    const auto x = centers(static_cast<int>(st.range(0)));
    std::vector<double> out(x.size());
    for (auto _ : st) {
        kernels::serial::cascade_pdf({0.3, 1.0}, x, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_grid_openmp(benchmark::State& st) {
    const auto x = centers(static_cast<int>(st.range(0)));
    std::vector<double> out(x.size() * x.size());
    for (auto _ : st) {
        // Mixture construction is part of every objective evaluation.
        kernels::mixture_pdf_grid(bicascade_mixture(kJoint), x, x, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

void BM_grid_serial(benchmark::State& st) {
    const auto x = centers(static_cast<int>(st.range(0)));
    std::vector<double> out(x.size() * x.size());
    for (auto _ : st) {
        kernels::serial::joint_cascade_pdf_grid(kJoint, x, x, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

struct ChiData {
    std::vector<double> pd, sd, pt;
    explicit ChiData(std::size_t n) : pd(n), sd(n), pt(n) {
        Engine eng = make_engine(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            pd[i] = u(eng);
            sd[i] = 0.01 + u(eng);
            pt[i] = u(eng);
        }
    }
};

void BM_chi2_openmp(benchmark::State& st) {
    const ChiData d(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::chi_square(d.pd, d.sd, d.pt, 2e5, 0.01));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_chi2_serial(benchmark::State& st) {
    const ChiData d(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::chi_square(d.pd, d.sd, d.pt, 2e5, 0.01));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_pdf1d_openmp)->Arg(64)->Arg(1024);
BENCHMARK(BM_pdf1d_serial)->Arg(64)->Arg(1024);
BENCHMARK(BM_grid_openmp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_grid_serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_chi2_openmp)->Arg(4096)->Arg(1 << 20);
BENCHMARK(BM_chi2_serial)->Arg(4096)->Arg(1 << 20);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
