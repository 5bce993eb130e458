#include "prismdg/exec.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace prismdg {

HaloField HaloField::flat(double* data, int per_element) {
  HaloField h;
  h.flat_ = data;
  h.per_element_ = per_element;
  return h;
}

HaloField HaloField::soa(FieldSoA<double>& field) {
  HaloField h;
  h.soa_ = &field;
  return h;
}

int HaloField::size(int elem) const {
  if (flat_) return per_element_;
  return soa_->components() * kPrismNodes * soa_->layers(elem);
}

namespace {

// Visits every value of element `elem` in a fixed order.
template <class F>
void for_each_value(FieldSoA<double>* soa, double* flat, int per_element, int elem, F&& f) {
  if (flat) {
    for (int i = 0; i < per_element; ++i) f(flat[static_cast<std::size_t>(elem) * per_element + i]);
    return;
  }
  const int first = soa->offset(elem);
  const int n = soa->layers(elem);
  for (int c = 0; c < soa->components(); ++c) {
    for (int k = 0; k < kPrismNodes; ++k) {
      for (int l = 0; l < n; ++l) f(soa->at(c, k, first + l));
    }
  }
}

}  // namespace

void HaloField::pack(int elem, std::vector<double>& out) const {
  for_each_value(soa_, flat_, per_element_, elem, [&](double& v) { out.push_back(v); });
}

void HaloField::unpack(int elem, const double* in) const {
  for_each_value(soa_, flat_, per_element_, elem, [&](double& v) { v = *in++; });
}

void HaloField::poison(int elem) const {
  for_each_value(soa_, flat_, per_element_, elem,
                 [](double& v) { v = std::numeric_limits<double>::signaling_NaN(); });
}

bool HaloField::any_nan(int elem) const {
  bool bad = false;
  for_each_value(soa_, flat_, per_element_, elem, [&](double& v) { bad = bad || std::isnan(v); });
  return bad;
}

const char* Executor::phase_name(int p) {
  static const char* names[] = {"boundary", "pack", "interior", "unpack"};
  return names[p];
}

SerialExecutor::SerialExecutor(int num_elements) : all_(num_elements) {
  std::iota(all_.begin(), all_.end(), 0);
}

void SerialExecutor::phase(const ElementKernel& kernel, std::vector<HaloField> fields) {
  kernel(all_);
  if (!fields.empty()) ++exchanges_;
}

}  // namespace prismdg
