#include "nloct/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace nloct::detail {

namespace {

// FFTW's planner mutates global state; executing a plan on its own arrays is
// safe once planning is done, so only plan creation/destruction is locked.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& in, int sign) {
    const int n = static_cast<int>(in.size());
    std::vector<std::complex<double>> buf(in);
    std::vector<std::complex<double>> out(in.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& in) {
    return transform(in, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft_unscaled(const std::vector<std::complex<double>>& in) {
    return transform(in, FFTW_BACKWARD);
}

}  // namespace nloct::detail
