#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phical {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define PHICAL_ERROR(Name)                                   \
  struct Name : Error {                                      \
    explicit Name(const std::string& m) : Error(#Name ": " + m) {} \
  };

PHICAL_ERROR(DivisionByZero)
PHICAL_ERROR(PoleAtSpecialization)
PHICAL_ERROR(VariableMismatch)
PHICAL_ERROR(ExpansionDirectionError)
PHICAL_ERROR(CompositionError)
PHICAL_ERROR(NotAnAssociateBase)
PHICAL_ERROR(PrecisionExhausted)
PHICAL_ERROR(PolicyError)
PHICAL_ERROR(WindowEscape)
PHICAL_ERROR(NoMultiplierFound)
PHICAL_ERROR(UncertifiedMultiplier)
PHICAL_ERROR(ShapeError)

#undef PHICAL_ERROR

struct ParseError : Error {
  std::size_t offset;
  ParseError(const std::string& m, std::size_t off)
      : Error("ParseError at offset " + std::to_string(off) + ": " + m), offset(off) {}
};

}  // namespace phical
