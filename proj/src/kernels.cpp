#include "emopred/kernels.hpp"

#include <cstdlib>

namespace emopred::kernels {
namespace {

const Backend* g_active = nullptr;

const Backend* resolve_auto() {
  if (const Backend* v = avx2_backend()) return v;
  return &scalar();
}

const Backend* resolve_env() {
  if (const char* env = std::getenv("EMOPRED_KERNELS")) {
    std::string name(env);
    if (name == "scalar") return &scalar();
    if (name == "avx2" && avx2_backend()) return avx2_backend();
    // unknown or unavailable value falls through to auto-detection
  }
  return resolve_auto();
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Backend& active() {
  if (!g_active) g_active = resolve_env();
  return *g_active;
}

bool select(const std::string& name) {
  if (name == "auto") {
    g_active = resolve_auto();
    return true;
  }
  if (name == "scalar") {
    g_active = &scalar();
    return true;
  }
  if (name == "avx2") {
    if (const Backend* v = avx2_backend()) {
      g_active = v;
      return true;
    }
    return false;
  }
  return false;
}

std::vector<std::string> available() {
  std::vector<std::string> names = {"scalar"};
  if (avx2_backend()) names.push_back("avx2");
  return names;
}

}  // namespace emopred::kernels
