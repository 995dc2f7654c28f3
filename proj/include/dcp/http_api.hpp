#pragma once

// JSON-over-HTTP front end for SessionManager.

#include <filesystem>
#include <string>

namespace httplib {
class Server;
}

namespace dcp {

class SessionManager;

/// Registers every session route on `server`. When `ui_dir` exists it is
/// served under /ui.
void register_routes(httplib::Server& server, SessionManager& sessions, const std::filesystem::path& ui_dir = {});

/// Blocking; returns false when the port cannot be bound.
bool serve(SessionManager& sessions, const std::string& host, int port, const std::filesystem::path& ui_dir = {});

}  // namespace dcp
