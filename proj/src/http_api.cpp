#include "dcp/http_api.hpp"

#include <functional>

#include "dcp/log.hpp"
#include "dcp/session.hpp"

// after Eigen: <resolv.h> defines a `_res` macro that breaks Eigen's headers
#include <httplib.h>

namespace dcp {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw UnprocessableError(std::string("malformed JSON body: ") + e.what());
  }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps library exceptions onto status codes.
httplib::Server::Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
    } catch (const UnprocessableError& e) {
      send_error(res, 422, e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 422, e.what());
    } catch (const std::exception& e) {
      log::error(std::string("request ") + req.method + " " + req.path + " failed: " + e.what());
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, SessionManager& sessions, const std::filesystem::path& ui_dir) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 201, {{"id", sessions.create(parse_body(req))}});
              }));
  server.Get("/sessions", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, {{"sessions", sessions.ids()}});
             }));
  server.Get(R"(/sessions/([\w-]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, sessions.snapshot(req.matches[1]));
             }));
  server.Post(R"(/sessions/([\w-]+)/demonstration)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                sessions.add_demonstration(req.matches[1], parse_body(req));
                send_json(res, 202, {{"accepted", "demonstration"}});
              }));
  server.Post(R"(/sessions/([\w-]+)/correction)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                sessions.add_correction(req.matches[1], parse_body(req));
                send_json(res, 202, {{"accepted", "correction"}});
              }));
  server.Get(R"(/sessions/([\w-]+)/query)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const std::string mode = req.has_param("mode") ? req.get_param_value("mode") : "active";
               send_json(res, 200, sessions.query(req.matches[1], mode));
             }));
  server.Post(R"(/sessions/([\w-]+)/preference)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                sessions.add_preference(req.matches[1], parse_body(req));
                send_json(res, 202, {{"accepted", "preference"}});
              }));
  server.Post(R"(/sessions/([\w-]+)/retrain)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                sessions.retrain(req.matches[1]);
                send_json(res, 202, {{"accepted", "retrain"}});
              }));
  server.Get(R"(/sessions/([\w-]+)/status)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, sessions.status(req.matches[1]));
             }));
  server.Get(R"(/sessions/([\w-]+)/trajectory)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, sessions.trajectory(req.matches[1]));
             }));
  server.Get(R"(/sessions/([\w-]+)/reward-field)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               int grid = 32;
               if (req.has_param("grid")) {
                 try {
                   std::size_t pos = 0;
                   const std::string g = req.get_param_value("grid");
                   grid = std::stoi(g, &pos);
                   if (pos != g.size()) throw std::invalid_argument("grid");
                 } catch (const std::exception&) {
                   throw UnprocessableError("grid must be an integer");
                 }
               }
               send_json(res, 200, sessions.reward_field(req.matches[1], grid));
             }));

  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) server.set_mount_point("/ui", ui_dir.string());
}

bool serve(SessionManager& sessions, const std::string& host, int port, const std::filesystem::path& ui_dir) {
  httplib::Server server;
  register_routes(server, sessions, ui_dir);
  log::info("listening on " + host + ":" + std::to_string(port));
  return server.listen(host, port);
}

}  // namespace dcp
