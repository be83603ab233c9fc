#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

namespace kickdyn {

/// Allocator returning 64-byte aligned storage, so every buffer handed to a
/// precomputed FFT plan has the alignment the plan was made for.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n)
    {
        return static_cast<T*>(::operator new(n * sizeof(T), alignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using complex = std::complex<double>;
using cvector = std::vector<complex, AlignedAllocator<complex>>;
using rvector = std::vector<double, AlignedAllocator<double>>;

} // namespace kickdyn
