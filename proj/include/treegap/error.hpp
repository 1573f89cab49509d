#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace treegap {

enum class ErrorCode {
  // tree construction
  CycleDetected,
  Disconnected,
  NonPositiveWeight,
  RootNotLeaf,
  UnknownVertex,
  UnknownEdge,
  EmptyVertexSet,
  DuplicateVertex,
  NoEdges,
  // parsing
  SyntaxError,
  ParseError,
  EmptyTree,
  NonPositiveBranchLength,
  // simplexes and loads
  EmptyTeam,
  EdgeNotInMinimalSubtree,
  NotNormalized,
  NonPositiveLoad,
  NotATreeHost,
  ZeroVector,
  NonZeroSum,
  SizeMismatch,
  TooFewVertices,
  NotPrunable,
  // metrics
  InvalidMetric,
  InvalidExponent,
  DegenerateMetric,
  TooFewPoints,
  TooFewLeaves,
  TooSmall,
  TooLarge,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::RootNotLeaf: return "RootNotLeaf";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::EmptyVertexSet: return "EmptyVertexSet";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::NoEdges: return "NoEdges";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyTree: return "EmptyTree";
    case ErrorCode::NonPositiveBranchLength: return "NonPositiveBranchLength";
    case ErrorCode::EmptyTeam: return "EmptyTeam";
    case ErrorCode::EdgeNotInMinimalSubtree: return "EdgeNotInMinimalSubtree";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NonPositiveLoad: return "NonPositiveLoad";
    case ErrorCode::NotATreeHost: return "NotATreeHost";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonZeroSum: return "NonZeroSum";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::TooFewVertices: return "TooFewVertices";
    case ErrorCode::NotPrunable: return "NotPrunable";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TooFewLeaves: return "TooFewLeaves";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Input could not be read at all (as opposed to read but rejected).
inline bool is_parse_error(ErrorCode code) {
  return code == ErrorCode::SyntaxError || code == ErrorCode::ParseError ||
         code == ErrorCode::EmptyTree;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        position_(position) {}

  ErrorCode code() const noexcept { return code_; }

  /// Byte offset (Newick) or 1-based line number (line formats), if known.
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace treegap
