#ifndef HERMRT_ERROR_HPP
#define HERMRT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hermrt
{

/// Non-physical state encountered while stepping (non-positive density,
/// temperature or internal energy).
class SimulationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hermrt

#endif  // HERMRT_ERROR_HPP
