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

#ifndef LEXSUB_SURVEY_SERVER_H_
#define LEXSUB_SURVEY_SERVER_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "lexsub/survey.h"

namespace lexsub {

struct SurveyServerConfig {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::string admin_token;
  std::string name_a = "system_a";
  std::string name_b = "system_b";
  std::size_t n_per_task = 15;
  std::optional<std::filesystem::path> static_dir;
};

// HTTP front end over a ResponseStore:
//   GET  /health     -> {"status":"ok"}
//   GET  /survey     -> {"respondent": token, "questions": [...]} without
//                       sources; each call issues a fresh opaque token
//   POST /response   {"respondent","qid","choice"} -> {"stored":true};
//                       400 with {"error","message"} when rejected, 403
//                       for a token this server never issued
//   GET  /aggregate  admin only ("Authorization: Bearer <token>" or
//                       ?token=); counts plus questions with sources
// Files under static_dir are served at /.
class SurveyServer {
 public:
  SurveyServer(ResponseStore& store, SurveyServerConfig config);
  ~SurveyServer();
  SurveyServer(const SurveyServer&) = delete;
  SurveyServer& operator=(const SurveyServer&) = delete;

  // Binds and serves on a background thread. Returns the bound port.
  int Start();
  // Binds and serves on the calling thread until Stop().
  void Run();
  // Blocks until a server started with Start() stops.
  void Wait();
  void Stop();
  // Asks the listener to exit without joining; safe from a signal handler
  // running on the thread blocked in Wait().
  void RequestStop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lexsub

#endif  // LEXSUB_SURVEY_SERVER_H_
