#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace qilab::fft {

// Smallest 5-smooth integer >= n. FFTW handles these sizes at full speed.
inline int next_fast_size(int n) {
    if (n < 1) return 1;
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

struct Plans {
    fftw_plan fwd = nullptr; // e^{-i...} (FFTW_FORWARD)
    fftw_plan bwd = nullptr; // e^{+i...} (FFTW_BACKWARD)
};

// Plan creation is not thread-safe; executing cached plans on fresh buffers is.
// Plans are created FFTW_UNALIGNED so new-array execution accepts any buffer.
inline const Plans& plans_for(int G) {
    static std::mutex mtx;
    static std::map<int, Plans> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(G);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> dummy(static_cast<std::size_t>(G) * G);
    auto* d = reinterpret_cast<fftw_complex*>(dummy.data());
    Plans p;
    p.fwd = fftw_plan_dft_2d(G, G, d, d, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_2d(G, G, d, d, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    return cache.emplace(G, p).first->second;
}

inline void execute(fftw_plan plan, std::complex<double>* in, std::complex<double>* out) {
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(out));
}

} // namespace qilab::fft
