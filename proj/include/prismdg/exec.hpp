#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "prismdg/layout.hpp"

namespace prismdg {

// Per-element view of a field whose ghost copies must be refreshed.
class HaloField {
 public:
  // `per_element` contiguous doubles per 2D element.
  static HaloField flat(double* data, int per_element);
  // All nodes, layers and components of a column.
  static HaloField soa(FieldSoA<double>& field);

  int size(int elem) const;
  void pack(int elem, std::vector<double>& out) const;
  // Consumes size(elem) values starting at `in`.
  void unpack(int elem, const double* in) const;
  void poison(int elem) const;
  bool any_nan(int elem) const;

 private:
  double* flat_ = nullptr;
  int per_element_ = 0;
  FieldSoA<double>* soa_ = nullptr;
};

using ElementKernel = std::function<void(std::span<const int> elements)>;

// Runs element kernels over the elements a worker owns and keeps ghost
// copies current. The serial executor owns everything and has no ghosts.
class Executor {
 public:
  virtual ~Executor() = default;

  virtual std::span<const int> owned() const = 0;
  // Owned elements followed by ghosts: where derived quantities are needed.
  virtual std::span<const int> local() const = 0;

  // kernel(owned), then ghosts of `fields` refreshed before returning.
  virtual void phase(const ElementKernel& kernel, std::vector<HaloField> fields) = 0;

  // Refresh ghosts without computing anything.
  void exchange(std::vector<HaloField> fields) {
    phase([](std::span<const int>) {}, std::move(fields));
  }

  long exchanges() const { return exchanges_; }

  virtual int rank() const { return 0; }
  // Blocks until every worker reaches it.
  virtual void barrier() {}

  // Accumulated wall time per schedule phase, microseconds.
  enum Phase { Boundary, Pack, Interior, Unpack, kPhases };
  static const char* phase_name(int p);
  const std::array<double, kPhases>& phase_micros() const { return micros_; }
  void reset_phase_micros() { micros_.fill(0.0); }

 protected:
  long exchanges_ = 0;
  std::array<double, kPhases> micros_{};
};

class SerialExecutor : public Executor {
 public:
  explicit SerialExecutor(int num_elements);

  std::span<const int> owned() const override { return all_; }
  std::span<const int> local() const override { return all_; }
  void phase(const ElementKernel& kernel, std::vector<HaloField> fields) override;

 private:
  std::vector<int> all_;
};

}  // namespace prismdg
