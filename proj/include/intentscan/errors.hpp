#ifndef INTENTSCAN_ERRORS_HPP
#define INTENTSCAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace intentscan {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedManifest : Error {
    using Error::Error;
};
struct MalformedSmali : Error {
    using Error::Error;
};
struct MissingManifest : Error {
    using Error::Error;
};
struct MissingSmaliTree : Error {
    using Error::Error;
};
struct StoreIO : Error {
    using Error::Error;
};
struct SchemaVersionMismatch : Error {
    using Error::Error;
};
struct UnmodeledOp : Error {
    using Error::Error;
};
struct UnknownGetSignature : Error {
    using Error::Error;
};
struct MissingFlows : Error {
    using Error::Error;
};
struct MalformedGroundTruth : Error {
    using Error::Error;
};

} // namespace intentscan

#endif
