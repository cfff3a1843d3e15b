#pragma once

#include <stdexcept>
#include <string>

namespace amf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by malformed user input: configs, manifests, feature files,
/// annotation files. The CLI maps these to the validation exit code.
class InputError : public Error {
 public:
  using Error::Error;
};

#define AMF_DEFINE_ERROR(Name, Base) \
  class Name : public Base {         \
   public:                           \
    using Base::Base;                \
  };

// numerics
AMF_DEFINE_ERROR(ShapeMismatch, Error)
AMF_DEFINE_ERROR(EmptyRow, Error)
AMF_DEFINE_ERROR(KernelTooLong, Error)
AMF_DEFINE_ERROR(EmptySequence, Error)
AMF_DEFINE_ERROR(LabelOutOfRange, Error)
AMF_DEFINE_ERROR(NonScalarLoss, Error)
AMF_DEFINE_ERROR(NonFiniteValue, Error)
AMF_DEFINE_ERROR(NonFiniteGradient, Error)

// encoders / fusion
AMF_DEFINE_ERROR(BadFrameGeometry, InputError)
AMF_DEFINE_ERROR(SequenceTooShort, InputError)
AMF_DEFINE_ERROR(EmptyKeys, Error)
AMF_DEFINE_ERROR(MissingModality, InputError)
AMF_DEFINE_ERROR(InvalidConfig, InputError)
AMF_DEFINE_ERROR(CorruptCheckpoint, InputError)

// data
AMF_DEFINE_ERROR(InvalidSpec, InputError)
AMF_DEFINE_ERROR(MissingFile, InputError)
AMF_DEFINE_ERROR(DimMismatch, InputError)
AMF_DEFINE_ERROR(UnknownVersion, InputError)
AMF_DEFINE_ERROR(BadLabel, InputError)
AMF_DEFINE_ERROR(MalformedFile, InputError)
AMF_DEFINE_ERROR(UnmatchedClips, InputError)

// evaluation
AMF_DEFINE_ERROR(TooFewSubjects, InputError)
AMF_DEFINE_ERROR(LengthMismatch, Error)
AMF_DEFINE_ERROR(EmptyInput, Error)
AMF_DEFINE_ERROR(EmptyTrainSet, InputError)
AMF_DEFINE_ERROR(DivergedLoss, Error)
AMF_DEFINE_ERROR(SubjectLeakage, Error)

#undef AMF_DEFINE_ERROR

}  // namespace amf
