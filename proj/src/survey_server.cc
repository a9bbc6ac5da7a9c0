//
// Copyright 2026 The lexsub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "lexsub/survey_server.h"

#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "lexsub/error.h"

namespace lexsub {
namespace {

std::string ErrorBody(std::string_view code, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

std::string NewToken() {
  static thread_local std::random_device device;
  static const char kHex[] = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t v = device();
    for (int k = 0; k < 8; ++k, v >>= 4) out.push_back(kHex[v & 0xF]);
  }
  return out;
}

}  // namespace

struct SurveyServer::Impl {
  ResponseStore& store;
  SurveyServerConfig config;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::mutex tokens_mu;
  std::set<std::string> tokens;
  std::string public_questions;

  Impl(ResponseStore& s, SurveyServerConfig c)
      : store(s), config(std::move(c)) {
    public_questions = QuestionsToJson(store.questions(), false);
    for (const SurveyResponse& r : store.Responses()) tokens.insert(r.respondent);
    Routes();
  }

  bool IsAdmin(const httplib::Request& req) const {
    if (config.admin_token.empty()) return false;
    if (req.get_header_value("Authorization") == "Bearer " + config.admin_token) {
      return true;
    }
    return req.has_param("token") &&
           req.get_param_value("token") == config.admin_token;
  }

  void Routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
    server.Get("/survey", [this](const httplib::Request&, httplib::Response& res) {
      std::string token = NewToken();
      {
        std::lock_guard<std::mutex> lock(tokens_mu);
        tokens.insert(token);
      }
      res.set_content("{\"respondent\":\"" + token +
                          "\",\"questions\":" + public_questions + "}",
                      "application/json");
    });
    server.Post("/response", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      try {
        SurveyResponse r = ResponseFromJson(req.body);
        r.timestamp_ms = 0;
        {
          std::lock_guard<std::mutex> lock(tokens_mu);
          if (!tokens.contains(r.respondent)) {
            res.status = 403;
            res.set_content(ErrorBody("UnknownRespondent",
                                      "respondent token was not issued here"),
                            "application/json");
            return;
          }
        }
        store.Record(r);
        res.set_content(R"({"stored":true})", "application/json");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(ErrorBody(ErrorCodeName(e.code()), e.what()),
                        "application/json");
      }
    });
    server.Get("/aggregate", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      if (!IsAdmin(req)) {
        res.status = 403;
        res.set_content(ErrorBody("Forbidden", "admin token required"),
                        "application/json");
        return;
      }
      const SurveyAggregate agg =
          Aggregate(store.questions(), store.Responses(), config.n_per_task);
      res.set_content("{\"aggregate\":" + agg.ToJson(config.name_a, config.name_b) +
                          ",\"questions\":" +
                          QuestionsToJson(store.questions(), true) + "}",
                      "application/json");
    });
    if (config.static_dir) {
      server.set_mount_point("/", config.static_dir->string());
    }
  }
};

SurveyServer::SurveyServer(ResponseStore& store, SurveyServerConfig config)
    : impl_(std::make_unique<Impl>(store, std::move(config))) {}

SurveyServer::~SurveyServer() { Stop(); }

namespace {

int Bind(httplib::Server& s, const SurveyServerConfig& config) {
  const int port = config.port == 0
                       ? s.bind_to_any_port(config.host)
                       : (s.bind_to_port(config.host, config.port) ? config.port
                                                                   : -1);
  if (port < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot bind " + config.host + ":" +
                    std::to_string(config.port));
  }
  return port;
}

}  // namespace

int SurveyServer::Start() {
  auto& s = impl_->server;
  impl_->port = Bind(s, impl_->config);
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return impl_->port;
}

void SurveyServer::Run() {
  impl_->port = Bind(impl_->server, impl_->config);
  impl_->server.listen_after_bind();
}

void SurveyServer::Wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void SurveyServer::RequestStop() { impl_->server.stop(); }

void SurveyServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int SurveyServer::port() const { return impl_->port; }

}  // namespace lexsub
