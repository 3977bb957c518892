#pragma once

#include <string>

namespace mcrd {

enum class KernelKind { triangular, uniform };

/// Compactly supported kernel on [-1, 1], symmetric around zero.
struct KernelSpec {
  KernelKind kind = KernelKind::triangular;
};

/// k(u): triangular (1-|u|)1{|u|<=1} or uniform 0.5*1{|u|<=1}.
double kernel_eval(const KernelSpec& k, double u);

KernelSpec kernel_from_name(const std::string& name);
const char* kernel_name(const KernelSpec& k);

}  // namespace mcrd
