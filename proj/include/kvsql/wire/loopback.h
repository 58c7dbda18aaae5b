#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "kvsql/wire/transport.h"

namespace kvsql::wire {

// Picks which parked request is delivered next. pick(n) returns an
// index in [0, n); the option list is ordered by task id, so a given
// chooser yields one schedule.
class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual size_t pick(size_t n_options) = 0;
};

class SeededChooser : public Chooser {
 public:
  explicit SeededChooser(uint64_t seed) : rng_(seed) {}
  size_t pick(size_t n) override {
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng_);
  }

 private:
  std::mt19937_64 rng_;
};

// Follows a fixed choice script, picking 0 past its end; records the
// option count seen at every step so a driver can enumerate schedules.
class ScriptedChooser : public Chooser {
 public:
  explicit ScriptedChooser(std::vector<size_t> script)
      : script_(std::move(script)) {}
  size_t pick(size_t n) override {
    size_t c = step_ < script_.size() ? script_[step_] : 0;
    step_++;
    observed_.push_back(n);
    return c < n ? c : n - 1;
  }
  const std::vector<size_t>& observed() const { return observed_; }

 private:
  std::vector<size_t> script_;
  std::vector<size_t> observed_;
  size_t step_ = 0;
};

// In-process deterministic message fabric. Client tasks register, then
// every request parks its task; when all live tasks are parked the
// scheduler delivers exactly one pending request, chosen by the
// Chooser, and runs the server handler on the scheduler thread. At most
// one task executes at any moment, so a (workload seed, schedule seed)
// pair fully determines a run. Handlers may defer their reply; the
// requesting task then stays parked until a later handler releases it.
class SimNet {
 public:
  using ServiceFn =
      std::function<void(const Message&, std::function<void(Message)>)>;

  // The scheduler delivers nothing until `gate` tasks have registered;
  // this keeps the first choice points identical run to run even though
  // task threads start at OS speed. raise_gate() extends the bar for a
  // later wave of tasks (counts total registrations, ever).
  SimNet(std::vector<ServiceFn> services, std::unique_ptr<Chooser> chooser,
         size_t gate = 1);
  ~SimNet();

  void raise_gate(size_t total_registrations_needed);

  SimNet(const SimNet&) = delete;
  SimNet& operator=(const SimNet&) = delete;

  // Every client task must hold a guard while it issues requests.
  // Task ids order the chooser's option list; use stable ids.
  class TaskGuard {
   public:
    TaskGuard(SimNet& net, size_t task_id);
    ~TaskGuard();
    size_t id() const { return id_; }

   private:
    SimNet& net_;
    size_t id_;
  };

  Message request(size_t task_id, ServerId dest, Message msg);
  size_t cluster_size() const { return services_.size(); }

  // Steps taken so far (delivered requests); exposed for tests.
  size_t steps() const;

 private:
  struct Pending {
    size_t task_id;
    ServerId dest;
    Message msg;
    bool done = false;
    std::optional<Message> reply;
    std::condition_variable cv;
  };

  void scheduler_loop();
  void finish(std::shared_ptr<Pending> slot, Message reply);

  std::vector<ServiceFn> services_;
  std::unique_ptr<Chooser> chooser_;

  mutable std::mutex mu_;
  std::condition_variable cv_sched_;
  std::vector<std::shared_ptr<Pending>> pending_;
  size_t live_ = 0;
  size_t running_ = 0;
  size_t registered_ = 0;  // total ever, monotone
  size_t gate_ = 1;
  size_t steps_ = 0;
  bool stop_ = false;
  std::thread sched_;
};

// Transport view over a SimNet for one client task.
class LoopbackTransport : public Transport {
 public:
  LoopbackTransport(std::shared_ptr<SimNet> net, size_t task_id)
      : net_(std::move(net)), task_id_(task_id) {}

  Message request(ServerId dest, Message msg) override {
    msg.request_id = next_id_++;
    return net_->request(task_id_, dest, std::move(msg));
  }
  size_t cluster_size() const override { return net_->cluster_size(); }

 private:
  std::shared_ptr<SimNet> net_;
  size_t task_id_;
  uint64_t next_id_ = 1;
};

}  // namespace kvsql::wire
