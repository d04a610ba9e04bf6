#pragma once

#include <stdexcept>
#include <string>

namespace slr {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class ContractError : public Error { public: using Error::Error; };
class DivergenceError : public Error { public: using Error::Error; };
class EvaluationError : public Error { public: using Error::Error; };
class LayoutError : public Error { public: using Error::Error; };
class LabelError : public Error { public: using Error::Error; };
class EncodingError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

/// A skeleton anchor has no same-label text in its pairing.
class DegeneratePairingError : public Error { public: using Error::Error; };

/// Failure inside one GSP stage; `stage()` names it (primary, synonym, refine, decompose).
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Non-finite loss during training.
class TrainingDivergence : public Error { public: using Error::Error; };

} // namespace slr
