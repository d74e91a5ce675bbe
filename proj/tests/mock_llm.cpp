#include "mock_llm.hpp"

#include <httplib.h>

namespace liftcheck::testutil {

MockLlm::MockLlm(Handler handler)
    : handler_(std::move(handler)), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/v1/complete", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    {
      std::lock_guard lock(mu_);
      requests_.push_back(body);
      auth_.push_back(req.get_header_value("Authorization"));
    }
    MockReply reply = handler_(body);
    res.status = reply.status;
    if (!reply.raw_body.empty())
      res.set_content(reply.raw_body, "application/json");
    else
      res.set_content(nlohmann::json{{"completion", reply.completion}}.dump(), "application/json");
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockLlm::~MockLlm() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockLlm::url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1/complete";
}

std::vector<nlohmann::json> MockLlm::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<std::string> MockLlm::auth_headers() const {
  std::lock_guard lock(mu_);
  return auth_;
}

}  // namespace liftcheck::testutil
