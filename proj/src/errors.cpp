#include "hde/errors.hpp"

#include <exception>

namespace hde {

void rethrow_with_context(const std::string& context)
{
    try {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(context + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(context + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(context + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(context + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(context + ": " + e.what());
    }
}

}  // namespace hde
