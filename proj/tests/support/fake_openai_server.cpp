// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "fake_openai_server.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>

#include "stepspec/backends/prompt.hpp"
#include "stepspec/simlab/chain_task.hpp"

namespace stepspec::testing {
namespace {

using json = nlohmann::json;

bool is_judge(const std::string& prompt) {
  return prompt.find(kScoreInstructionLine) != std::string::npos;
}

}  // namespace

FakeOpenAiServer::FakeOpenAiServer() : FakeOpenAiServer(Options{}) {}

FakeOpenAiServer::FakeOpenAiServer(Options options)
    : options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/v1/completions",
                [this](const httplib::Request& req, httplib::Response& res) {
                  int status = 200;
                  auto body = handle(req.body, req.get_header_value("Authorization"),
                                     status);
                  res.status = status;
                  res.set_content(body, "application/json");
                });
}

FakeOpenAiServer::~FakeOpenAiServer() { stop(); }

void FakeOpenAiServer::add_model(const std::string& name,
                                 std::shared_ptr<SimBackend> model) {
  models_[name] = std::move(model);
}

void FakeOpenAiServer::fail_next(int n, int status) {
  failure_status_ = status;
  failures_left_ = n;
}

void FakeOpenAiServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("fake server: cannot bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void FakeOpenAiServer::stop() {
  if (thread_.joinable()) {
    server_->stop();
    thread_.join();
  }
}

std::string FakeOpenAiServer::url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

std::string FakeOpenAiServer::handle(const std::string& raw,
                                     const std::string& auth, int& status) {
  ++requests_;
  if (failures_left_.load() > 0) {
    --failures_left_;
    status = failure_status_;
    return json{{"error", {{"message", "injected failure"}}}}.dump();
  }
  if (!options_.required_api_key.empty() &&
      auth != "Bearer " + options_.required_api_key) {
    status = 401;
    return json{{"error", {{"message", "bad api key"}}}}.dump();
  }

  json body;
  try {
    body = json::parse(raw);
  } catch (const json::parse_error&) {
    status = 400;
    return json{{"error", {{"message", "bad json"}}}}.dump();
  }
  auto it = models_.find(body.value("model", ""));
  if (it == models_.end()) {
    status = 404;
    return json{{"error", {{"message", "unknown model"}}}}.dump();
  }
  const SimBackend& model = *it->second;

  GenerationRequest req;
  req.prompt = body.value("prompt", "");
  req.max_tokens = body.value("max_tokens", 16);
  req.temperature = body.value("temperature", 1.0);
  if (body.contains("stop") && body["stop"].is_array()) {
    req.stop = body["stop"].get<std::vector<std::string>>();
  }
  if (body.contains("seed")) req.seed_hint = body["seed"].get<std::uint64_t>();
  const bool want_logprobs = body.contains("logprobs") && !body["logprobs"].is_null();
  req.want_top_logprobs = want_logprobs;

  // Prompts that hold no chain task (profiling probes) get filler words.
  std::string stream;
  if (!simlab::parse_problem(req.prompt)) {
    for (Tokens i = 0; i < req.max_tokens; ++i) stream += "tick ";
  } else {
    stream = model.raw_stream(req);
  }
  if (options_.garbage_scores && is_judge(req.prompt)) stream = "maybe";

  // Decode piece by piece, stopping on the first stop string.
  std::string text;
  Tokens produced = 0;
  std::string finish = "stop";
  json stop_reason = nullptr;
  for (const auto& piece : token_pieces(stream)) {
    if (produced >= req.max_tokens) {
      finish = "length";
      break;
    }
    text += piece;
    ++produced;
    std::size_t best = std::string::npos;
    std::string hit;
    for (const auto& s : req.stop) {
      auto at = text.find(s);
      if (at != std::string::npos && at < best) {
        best = at;
        hit = s;
      }
    }
    if (best != std::string::npos) {
      text.resize(best);
      stop_reason = hit;
      break;
    }
  }
  if (produced >= req.max_tokens && stop_reason.is_null() &&
      token_pieces(stream).size() > static_cast<std::size_t>(produced)) {
    finish = "length";
  }

  json choice = {{"index", 0},
                 {"text", text},
                 {"finish_reason", finish},
                 {"stop_reason", stop_reason}};
  if (want_logprobs && produced > 0) {
    json top = json::object();
    if (is_judge(req.prompt) && !options_.garbage_scores) {
      auto g = model.generate(req);
      if (g.top_logprobs) {
        for (const auto& [k, v] : *g.top_logprobs) top[k] = v;
      }
      top["Wait"] = std::log(0.05);
    } else {
      top[text.empty() ? std::string(" ") : text.substr(0, text.find(' '))] = -0.1;
    }
    choice["logprobs"] = {{"tokens", json::array({text})},
                          {"token_logprobs", json::array({-0.1})},
                          {"top_logprobs", json::array({top})},
                          {"text_offset", json::array({0})}};
  }
  const Tokens prompt_tokens = count_tokens(req.prompt);
  if (options_.emulate_timing) {
    double s = options_.decode_s_per_token * static_cast<double>(produced) +
               static_cast<double>(prompt_tokens) / options_.prefill_tokens_per_s;
    std::this_thread::sleep_for(std::chrono::duration<double>(s));
  }
  return json{{"id", "cmpl-" + std::to_string(requests_.load())},
              {"object", "text_completion"},
              {"model", it->first},
              {"choices", json::array({choice})},
              {"usage",
               {{"prompt_tokens", prompt_tokens},
                {"completion_tokens", produced},
                {"total_tokens", prompt_tokens + produced}}}}
      .dump();
}

}  // namespace stepspec::testing
