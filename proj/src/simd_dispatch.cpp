#include "qcl/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace qcl::simd {

namespace {

struct Selected {
    const Kernels* k;
    std::string name;
};

Selected select() {
    const char* env = std::getenv("QCL_SIMD");
#if defined(__x86_64__) || defined(_M_X64)
    if (env && std::strcmp(env, "scalar") == 0) return {&scalar(), "scalar"};
    if (env && std::strcmp(env, "avx2") == 0 && avx2_supported()) return {&avx2(), "avx2"};
    if (!env && avx2_supported()) return {&avx2(), "avx2"};
#else
    (void)env;
#endif
    return {&scalar(), "scalar"};
}

const Selected& get() {
    static const Selected s = select();
    return s;
}

}  // namespace

const Kernels& active() { return *get().k; }
const std::string& backend_name() { return get().name; }

}  // namespace qcl::simd
