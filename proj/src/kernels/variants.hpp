#pragma once

#include "fidbench/kernels.hpp"

namespace fidbench::kernels::detail {

extern const KernelTable scalar_table;
#if defined(FIDBENCH_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(FIDBENCH_HAVE_NEON)
extern const KernelTable neon_table;
#endif

} // namespace fidbench::kernels::detail
