#pragma once

#include <string>

namespace snnloop {

// Which spiking neuron model a converted network runs.
//
// IF   - integrate-and-fire with soft reset (reset by subtraction).
// SNM  - signed neuron with memory: emits +-theta spikes, with a
//        cumulative-output guard keeping the decoded activation >= 0.
// MT   - multi-threshold neuron: fires one of n power-of-two-scaled
//        thresholds per step, selected by nearest-threshold rounding.
// Differential coding is a wrapper around IF or MT that feeds each neuron
// the change of its running-average input instead of the raw current.
struct NeuronKind {
  enum class Base { IF, SNM, MT };

  Base base = Base::IF;
  bool differential = false;
  int thresholds = 4;       // positive-threshold count n (MT only)
  bool snm_literal = false; // verbatim negative-spike rule (diagnostic)

  static NeuronKind if_neuron() { return {}; }
  static NeuronKind snm(bool literal = false) {
    return {Base::SNM, false, 4, literal};
  }
  static NeuronKind mt(int n = 4) { return {Base::MT, false, n, false}; }
  static NeuronKind dc(Base inner = Base::MT, int n = 4) {
    return {inner, true, n, false};
  }

  bool uses_cumulative() const { return base != Base::IF; }

  void validate() const;
  std::string describe() const;  // "if", "snm", "mt4", "dc[mt4]", ...
};

// Parses config/file fields: kind one of "if|snm|mt|dc", n the MT
// threshold count, inner ("if"|"mt") for differential coding.
NeuronKind parse_neuron_kind(const std::string& kind, int n,
                             const std::string& inner);

}  // namespace snnloop
