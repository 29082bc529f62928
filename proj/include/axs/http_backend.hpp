#pragma once

#include <string>

#include <json.hpp>

namespace axs {

/// JSON-over-HTTP POST shared by the external model adapters. Maps transport
/// failures onto the backend error codes:
///   timeout                     -> BACKEND_TIMEOUT
///   refused / non-200 / reset   -> BACKEND_UNAVAILABLE
///   body not a JSON object      -> MALFORMED_RESPONSE
nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, int timeout_ms);

}  // namespace axs
