// Timing comparison between the OpenMP kernels and their serial reference
// implementations: kernel-table construction (fan-out over tau blocks) and
// the Volterra history sums (chunked reductions).

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nmse/dynamics.hpp"
#include "nmse/kernel.hpp"

using namespace nmse;

namespace {

template <class F>
double time_it(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    double tmax = 2000.0;
    double dt = 0.05;
    if (argc > 1) tmax = std::stod(argv[1]);
    if (argc > 2) dt = std::stod(argv[2]);

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    EmitterConfig emitter;
    emitter.omega0_ev = 1.95;
    emitter.gamma0_ev = 59e-6;
    emitter.z_nm = 5.0;
    emitter.rwa = RwaMode::With;
    const auto spec = PurcellSpectrum::lorentzian_sum({{2.0e4, 1.95, 2e-3}}, 1.89, 2.01);

    KernelTable tp, ts;
    const double t_par = time_it([&] { tp = build_kernel_table(emitter, spec, tmax, dt); });
    const double t_ser = time_it([&] { ts = build_kernel_table_serial(emitter, spec, tmax, dt); });
    double kmax = 0.0, kdiff = 0.0;
    for (std::size_t i = 0; i < tp.values.size(); ++i) {
        kmax = std::max(kmax, std::abs(tp.values[i]));
        kdiff = std::max(kdiff, std::abs(tp.values[i] - ts.values[i]));
    }
    std::printf("kernel table  (%zu nodes, %zu panels): omp %.3f s  serial %.3f s  speedup %.2fx  max rel diff %.2e\n",
                tp.values.size(), tp.panels, t_par, t_ser, t_ser / t_par, kdiff / kmax);

    DynamicsResult rp, rs;
    const SolveOptions no_check{false, 1e-4};
    const double v_par = time_it([&] { rp = solve_volterra(tp, tmax, dt, no_check); });
    const double v_ser = time_it([&] { rs = solve_volterra_reference(tp, tmax, dt); });
    double pdiff = 0.0;
    for (std::size_t i = 0; i < rp.population.size(); ++i)
        pdiff = std::max(pdiff, std::abs(rp.population[i] - rs.population[i]));
    std::printf("volterra      (%zu steps):             omp %.3f s  serial %.3f s  speedup %.2fx  max pop diff %.2e\n",
                rp.population.size() - 1, v_par, v_ser, v_ser / v_par, pdiff);
    return 0;
}
