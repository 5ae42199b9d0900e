// Timing comparison of the OpenMP tridiagonalization kernel against the
// serial reference pass, on Lipkin matrices of growing dimension.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "esqpt/eigen.hpp"
#include "esqpt/models.hpp"

namespace {

double seconds_for(const esqpt::SymMatrix& h,
                   esqpt::eig::Spectrum (*solver)(const esqpt::SymMatrix&),
                   esqpt::eig::Spectrum& out) {
    auto t0 = std::chrono::steady_clock::now();
    out = solver(h);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("# OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("# OpenMP disabled (serial build)\n");
#endif
    std::printf("%8s %14s %14s %9s %12s\n", "dim", "parallel_s", "reference_s",
                "speedup", "max_dev");
    for (int n : {200, 400, 800, 1200, 1600}) {
        esqpt::Lipkin spec{n, 2.0, 0.0};
        auto h = esqpt::build_lipkin(spec);
        esqpt::eig::Spectrum fast, ref;
        double t_fast = seconds_for(h, esqpt::eig::diagonalize, fast);
        double t_ref = seconds_for(h, esqpt::eig::diagonalize_reference, ref);
        double dev = 0.0;
        for (int i = 0; i < fast.n; ++i)
            dev = std::max(dev, std::fabs(fast.values[i] - ref.values[i]));
        std::printf("%8d %14.4f %14.4f %9.2f %12.3e\n", fast.n, t_fast, t_ref,
                    t_ref / t_fast, dev);
    }
    return 0;
}
