#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netfbm {

/// Failure categories raised across the library. Each maps to one named
/// failure mode of an operation; callers branch on the code, not the text.
enum class Errc {
    // network model
    EmptyGraph,
    LoopNotSupported,
    Disconnected,
    InvalidVertexCount,
    NegativeNoiseEntry,
    NoActiveNoise,
    ShapeMismatch,
    InvalidPotential,
    // spatial operator
    SingularPassiveBlock,
    SpectrumHit,
    NonDiagonalizable,
    EigensolverFailure,
    // semigroup
    NegativeTime,
    NotProjectionCase,
    NotUniquelySolvable,
    // noise
    InvalidHurst,
    HurstTooLow,
    EmbeddingNotPSD,
    NonUniformGrid,
    // stochastic solver
    GridMismatch,
    AlphaTooLarge,
    // configuration
    UnknownKey,
    MissingSection,
    OutOfRange,
    ParseError,
    Io,
};

[[nodiscard]] std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace netfbm
