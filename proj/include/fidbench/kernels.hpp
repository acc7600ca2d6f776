#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the tree trainer and the fidelity metrics.
// Every kernel has a scalar reference implementation; AVX2 (x86-64) and NEON
// (aarch64) variants are selected at runtime. Element-wise kernels are
// bit-identical across variants. Reductions may differ by reassociation
// rounding only.
//
// Set FIDBENCH_FORCE_SCALAR=1 in the environment to pin the scalar variant.

namespace fidbench::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct ErrorSums {
    double abs_sum = 0.0;
    double sq_sum = 0.0;
};

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    ErrorSums (*error_sums)(const double* predicted, const double* truth, std::size_t n);
    // out[k] = ls[k]^2 / lc[k] + (ts - ls[k])^2 / (tc - lc[k])
    void (*split_proxies)(const double* left_count, const double* left_sum, std::size_t m,
                          double total_count, double total_sum, double* out);
};

// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* table(Isa isa);
const KernelTable& active();

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
ErrorSums error_sums(std::span<const double> predicted, std::span<const double> truth);
void split_proxies(std::span<const double> left_count, std::span<const double> left_sum,
                   double total_count, double total_sum, std::span<double> out);

} // namespace fidbench::kernels
