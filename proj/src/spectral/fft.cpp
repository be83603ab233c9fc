#include "kickdyn/spectral.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace kickdyn::spectral {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(complex* p) { return reinterpret_cast<fftw_complex*>(p); }

} // namespace

struct FftPlan::Impl {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~Impl()
    {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

FftPlan::FftPlan(std::vector<Dim> dims, std::vector<Dim> loops) : impl_(std::make_unique<Impl>())
{
    if (dims.empty()) throw std::invalid_argument("FftPlan: no transform dimensions");
    std::vector<fftw_iodim64> fd;
    std::vector<fftw_iodim64> fl;
    transform_size_ = 1;
    span_ = 1;
    for (const auto& d : dims) {
        if (d.n < 1) throw std::invalid_argument("FftPlan: bad dimension");
        fd.push_back({d.n, d.stride, d.stride});
        transform_size_ *= static_cast<std::size_t>(d.n);
        span_ += static_cast<std::size_t>(d.n - 1) * static_cast<std::size_t>(d.stride);
    }
    std::size_t total = transform_size_;
    for (const auto& l : loops) {
        fl.push_back({l.n, l.stride, l.stride});
        span_ += static_cast<std::size_t>(l.n - 1) * static_cast<std::size_t>(l.stride);
        total *= static_cast<std::size_t>(l.n);
    }
    dense_ = (total == span_);

    // Planning with FFTW_ESTIMATE never touches the buffer contents.
    cvector probe(span_);
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE;
    impl_->forward = fftw_plan_guru64_dft(static_cast<int>(fd.size()), fd.data(), static_cast<int>(fl.size()),
                                          fl.data(), as_fftw(probe.data()), as_fftw(probe.data()),
                                          FFTW_FORWARD, flags);
    impl_->backward = fftw_plan_guru64_dft(static_cast<int>(fd.size()), fd.data(), static_cast<int>(fl.size()),
                                           fl.data(), as_fftw(probe.data()), as_fftw(probe.data()),
                                           FFTW_BACKWARD, flags);
    if (!impl_->forward || !impl_->backward) throw std::runtime_error("FftPlan: FFTW planning failed");
}

FftPlan::FftPlan(std::size_t n) : FftPlan({Dim{static_cast<int>(n), 1}}, {}) {}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(complex* data) const
{
    fftw_execute_dft(impl_->forward, as_fftw(data), as_fftw(data));
}

void FftPlan::backward_unscaled(complex* data) const
{
    fftw_execute_dft(impl_->backward, as_fftw(data), as_fftw(data));
}

void FftPlan::backward(complex* data) const
{
    backward_unscaled(data);
    if (!dense_) throw std::logic_error("FftPlan::backward: layout has gaps, use backward_unscaled");
    const double s = 1.0 / static_cast<double>(transform_size_);
    for (std::size_t j = 0; j < span_; ++j) data[j] *= s;
}

} // namespace kickdyn::spectral
