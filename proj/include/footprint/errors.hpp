#pragma once

#include <stdexcept>
#include <string>

namespace footprint {

// Base of everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problems with operator-supplied inputs (files, schemas, label tables).
// The CLI maps these to exit code 2.
struct DataError : Error {
    using Error::Error;
};

// Contract violations inside a pipeline stage. CLI exit code 3.
struct StageError : Error {
    using Error::Error;
};

struct UnreadableFile : DataError { using DataError::DataError; };
struct SchemaMismatch : DataError { using DataError::DataError; };
struct DuplicateAccountConflict : DataError { using DataError::DataError; };
struct UnknownCategoryToken : DataError { using DataError::DataError; };
struct InvalidConfig : DataError { using DataError::DataError; };

struct UnknownAccount : StageError { using StageError::StageError; };
struct EmptyDataset : StageError { using StageError::StageError; };
struct ZeroVector : StageError { using StageError::StageError; };
struct NoCategorizedActivity : StageError { using StageError::StageError; };
struct NoEntries : StageError { using StageError::StageError; };
struct EmptyNode : StageError { using StageError::StageError; };
struct TooFewSamples : StageError { using StageError::StageError; };
struct SingleClassTrainingSet : StageError { using StageError::StageError; };
struct DimensionMismatch : StageError { using StageError::StageError; };
struct UnsupportedKind : StageError { using StageError::StageError; };
struct CategoryTooSmall : StageError { using StageError::StageError; };
struct AccountSetMismatch : StageError { using StageError::StageError; };
struct EmptyIntersection : StageError { using StageError::StageError; };
struct NoOverlap : StageError { using StageError::StageError; };

}  // namespace footprint
