#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moljson {

enum class ErrorKind {
  DuplicateBond,
  SelfLoop,
  UnknownElement,
  ValenceOverflow,
  BadAtomIndex,
  KekulizationFailure,
  MalformedJson,
  SchemaViolation,
  DuplicateAtomId,
  DanglingReference,
  EmptyMolecule,
  SyntaxError,
  UnclosedRing,
  UnclosedBranch,
  UnsupportedFeature,
  BadCountsLine,
  TruncatedBlock,
  BadBondIndex,
  MissingTerminator,
  NoAtomBlockFound,
  AmbiguousBlocks,
  Unreachable,
  MissingSourceRendering,
  ZeroTrials,
  JoinMismatch,
  MissingFixture,
  ProviderError,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateBond: return "DuplicateBond";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::UnknownElement: return "UnknownElement";
    case ErrorKind::ValenceOverflow: return "ValenceOverflow";
    case ErrorKind::BadAtomIndex: return "BadAtomIndex";
    case ErrorKind::KekulizationFailure: return "KekulizationFailure";
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::DuplicateAtomId: return "DuplicateAtomId";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::EmptyMolecule: return "EmptyMolecule";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnclosedRing: return "UnclosedRing";
    case ErrorKind::UnclosedBranch: return "UnclosedBranch";
    case ErrorKind::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorKind::BadCountsLine: return "BadCountsLine";
    case ErrorKind::TruncatedBlock: return "TruncatedBlock";
    case ErrorKind::BadBondIndex: return "BadBondIndex";
    case ErrorKind::MissingTerminator: return "MissingTerminator";
    case ErrorKind::NoAtomBlockFound: return "NoAtomBlockFound";
    case ErrorKind::AmbiguousBlocks: return "AmbiguousBlocks";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::MissingSourceRendering: return "MissingSourceRendering";
    case ErrorKind::ZeroTrials: return "ZeroTrials";
    case ErrorKind::JoinMismatch: return "JoinMismatch";
    case ErrorKind::MissingFixture: return "MissingFixture";
    case ErrorKind::ProviderError: return "ProviderError";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit. `kind()` is stable and meant for
/// dispatch; `what()` carries a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Valence failure with the offending atom and the numbers involved.
class ValenceError : public Error {
 public:
  ValenceError(int atom, int valence, int allowed_max)
      : Error(ErrorKind::ValenceOverflow,
              "atom " + std::to_string(atom) + " has valence " +
                  std::to_string(valence) + ", allowed max " +
                  std::to_string(allowed_max)),
        atom_(atom), valence_(valence), allowed_max_(allowed_max) {}

  int atom() const noexcept { return atom_; }
  int valence() const noexcept { return valence_; }
  int allowed_max() const noexcept { return allowed_max_; }

 private:
  int atom_;
  int valence_;
  int allowed_max_;
};

/// SMILES/MOL syntax problems keep the character or line position.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t position, const std::string &detail)
      : Error(kind, detail + " at " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace moljson
