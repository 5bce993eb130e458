#pragma once

#include <stdexcept>
#include <string>

namespace prismdg {

// Base of every error raised by the library. Numeric aborts carry enough
// context in the message to locate the offending column/layer/step.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PRISMDG_ERROR(Name)              \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

PRISMDG_ERROR(NonPositiveArea);
PRISMDG_ERROR(DryColumn);
PRISMDG_ERROR(NonConformingLayers);
PRISMDG_ERROR(ShapeMismatch);
PRISMDG_ERROR(NonPositiveLength);
PRISMDG_ERROR(DegenerateLayer);
PRISMDG_ERROR(CflViolation);
PRISMDG_ERROR(SingularMass);
PRISMDG_ERROR(TooManyRanks);
PRISMDG_ERROR(ChannelClosed);
PRISMDG_ERROR(MapMismatch);
PRISMDG_ERROR(ScheduleViolation);
PRISMDG_ERROR(ConfigError);
PRISMDG_ERROR(IoError);

#undef PRISMDG_ERROR

class ZeroPivot : public Error {
 public:
  ZeroPivot(int layer, int node)
      : Error("zero pivot at layer " + std::to_string(layer) + ", node " +
              std::to_string(node) + " (diagonal dominance lost; reduce dt)"),
        layer_(layer),
        node_(node) {}

  int layer() const { return layer_; }
  int node() const { return node_; }

 private:
  int layer_;
  int node_;
};

}  // namespace prismdg
