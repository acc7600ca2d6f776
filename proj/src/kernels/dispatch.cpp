#include <cstdlib>
#include <string>

#include "fidbench/error.hpp"
#include "variants.hpp"

namespace fidbench::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return "scalar";
    case Isa::avx2:
        return "avx2";
    case Isa::neon:
        return "neon";
    }
    return "unknown";
}

const KernelTable* table(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return &detail::scalar_table;
    case Isa::avx2:
#if defined(FIDBENCH_HAVE_AVX2)
        if (__builtin_cpu_supports("avx2")) {
            return &detail::avx2_table;
        }
#endif
        return nullptr;
    case Isa::neon:
#if defined(FIDBENCH_HAVE_NEON)
        return &detail::neon_table;
#else
        return nullptr;
#endif
    }
    return nullptr;
}

namespace {

const KernelTable& select() {
    if (const char* force = std::getenv("FIDBENCH_FORCE_SCALAR"); force && std::string(force) == "1") {
        return detail::scalar_table;
    }
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (const KernelTable* t = table(isa)) {
            return *t;
        }
    }
    return detail::scalar_table;
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ValidationError(std::string(what) + ": length mismatch " + std::to_string(a) +
                              " vs " + std::to_string(b));
    }
}

} // namespace

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size(), "dot");
    return active().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) {
    return active().sum(a.data(), a.size());
}

ErrorSums error_sums(std::span<const double> predicted, std::span<const double> truth) {
    require_same_size(predicted.size(), truth.size(), "error_sums");
    return active().error_sums(predicted.data(), truth.data(), predicted.size());
}

void split_proxies(std::span<const double> left_count, std::span<const double> left_sum,
                   double total_count, double total_sum, std::span<double> out) {
    require_same_size(left_count.size(), left_sum.size(), "split_proxies");
    require_same_size(left_count.size(), out.size(), "split_proxies");
    active().split_proxies(left_count.data(), left_sum.data(), left_count.size(), total_count,
                           total_sum, out.data());
}

} // namespace fidbench::kernels
