#include "snnloop/neuron.hpp"

#include "snnloop/errors.hpp"

namespace snnloop {

void NeuronKind::validate() const {
  if (base == Base::MT && thresholds < 1) {
    throw ValidationError("MT threshold count n must be >= 1 (got " +
                          std::to_string(thresholds) + ")");
  }
  if (differential && base == Base::SNM) {
    throw ValidationError("differential coding wraps IF or MT, not SNM");
  }
}

std::string NeuronKind::describe() const {
  std::string inner;
  switch (base) {
    case Base::IF:
      inner = "if";
      break;
    case Base::SNM:
      inner = snm_literal ? "snm-literal" : "snm";
      break;
    case Base::MT:
      inner = "mt" + std::to_string(thresholds);
      break;
  }
  return differential ? "dc[" + inner + "]" : inner;
}

NeuronKind parse_neuron_kind(const std::string& kind, int n,
                             const std::string& inner) {
  NeuronKind k;
  k.thresholds = n;
  if (kind == "if") {
    k.base = NeuronKind::Base::IF;
  } else if (kind == "snm") {
    k.base = NeuronKind::Base::SNM;
  } else if (kind == "mt") {
    k.base = NeuronKind::Base::MT;
  } else if (kind == "dc") {
    k.differential = true;
    if (inner == "if") {
      k.base = NeuronKind::Base::IF;
    } else if (inner == "mt") {
      k.base = NeuronKind::Base::MT;
    } else {
      throw ValidationError("unknown differential-coding inner neuron '" +
                            inner + "' (expected if|mt)");
    }
  } else {
    throw ValidationError("unknown neuron kind '" + kind +
                          "' (expected if|snm|mt|dc)");
  }
  k.validate();
  return k;
}

}  // namespace snnloop
