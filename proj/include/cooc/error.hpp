#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cooc {

enum class Errc {
  CyclicGrammar,
  MissingProduction,
  DuplicateProduction,
  BadExponent,
  LengthOverflow,
  ExpansionTooLarge,
  OutOfBounds,
  EmptyText,
  SeedExhausted,
  EmptyPattern,
  LengthMismatch,
  ParamSearchExhausted,
  EagerTooLarge,
  NegativeBound,
  Parse,
  IO,
  BadIndexFile,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::CyclicGrammar: return "CyclicGrammar";
    case Errc::MissingProduction: return "MissingProduction";
    case Errc::DuplicateProduction: return "DuplicateProduction";
    case Errc::BadExponent: return "BadExponent";
    case Errc::LengthOverflow: return "LengthOverflow";
    case Errc::ExpansionTooLarge: return "ExpansionTooLarge";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::EmptyText: return "EmptyText";
    case Errc::SeedExhausted: return "SeedExhausted";
    case Errc::EmptyPattern: return "EmptyPattern";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ParamSearchExhausted: return "ParamSearchExhausted";
    case Errc::EagerTooLarge: return "EagerTooLarge";
    case Errc::NegativeBound: return "NegativeBound";
    case Errc::Parse: return "Parse";
    case Errc::IO: return "IO";
    case Errc::BadIndexFile: return "BadIndexFile";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& what)
      : std::runtime_error(std::string(errc_name(c)) + ": " + what), code(c) {}
  Errc code;
};

// internal invariant; always on, independent of NDEBUG
#define COOC_CHECK(cond)                                                       \
  do {                                                                         \
    if (!(cond)) ::cooc::check_failed(#cond, __FILE__, __LINE__);              \
  } while (0)

[[noreturn]] inline void check_failed(const char* what, const char* file, int line) {
  throw std::logic_error(std::string("check failed: ") + what + " at " + file + ":" +
                         std::to_string(line));
}

}  // namespace cooc
