#include "netfbm/error.hpp"

namespace netfbm {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyGraph: return "EmptyGraph";
        case Errc::LoopNotSupported: return "LoopNotSupported";
        case Errc::Disconnected: return "Disconnected";
        case Errc::InvalidVertexCount: return "InvalidVertexCount";
        case Errc::NegativeNoiseEntry: return "NegativeNoiseEntry";
        case Errc::NoActiveNoise: return "NoActiveNoise";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::InvalidPotential: return "InvalidPotential";
        case Errc::SingularPassiveBlock: return "SingularPassiveBlock";
        case Errc::SpectrumHit: return "SpectrumHit";
        case Errc::NonDiagonalizable: return "NonDiagonalizable";
        case Errc::EigensolverFailure: return "EigensolverFailure";
        case Errc::NegativeTime: return "NegativeTime";
        case Errc::NotProjectionCase: return "NotProjectionCase";
        case Errc::NotUniquelySolvable: return "NotUniquelySolvable";
        case Errc::InvalidHurst: return "InvalidHurst";
        case Errc::HurstTooLow: return "HurstTooLow";
        case Errc::EmbeddingNotPSD: return "EmbeddingNotPSD";
        case Errc::NonUniformGrid: return "NonUniformGrid";
        case Errc::GridMismatch: return "GridMismatch";
        case Errc::AlphaTooLarge: return "AlphaTooLarge";
        case Errc::UnknownKey: return "UnknownKey";
        case Errc::MissingSection: return "MissingSection";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::ParseError: return "ParseError";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace netfbm
