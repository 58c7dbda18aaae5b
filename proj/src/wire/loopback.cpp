#include "kvsql/wire/loopback.h"

#include <algorithm>
#include <thread>

namespace kvsql::wire {

SimNet::SimNet(std::vector<ServiceFn> services,
               std::unique_ptr<Chooser> chooser, size_t gate)
    : services_(std::move(services)),
      chooser_(std::move(chooser)),
      gate_(gate) {
  sched_ = std::thread([this] { scheduler_loop(); });
}

void SimNet::raise_gate(size_t total_registrations_needed) {
  {
    std::lock_guard lk(mu_);
    gate_ = total_registrations_needed;
  }
  cv_sched_.notify_all();
}

SimNet::~SimNet() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  cv_sched_.notify_all();
  sched_.join();
}

SimNet::TaskGuard::TaskGuard(SimNet& net, size_t task_id)
    : net_(net), id_(task_id) {
  {
    std::lock_guard lk(net_.mu_);
    net_.live_++;
    net_.running_++;
    net_.registered_++;
  }
  net_.cv_sched_.notify_all();
}

SimNet::TaskGuard::~TaskGuard() {
  {
    std::lock_guard lk(net_.mu_);
    net_.live_--;
    net_.running_--;
  }
  net_.cv_sched_.notify_all();
}

Message SimNet::request(size_t task_id, ServerId dest, Message msg) {
  if (dest >= services_.size())
    throw TransportError("destination not in cluster membership");
  auto slot = std::make_shared<Pending>();
  slot->task_id = task_id;
  slot->dest = dest;
  slot->msg = std::move(msg);

  std::unique_lock lk(mu_);
  pending_.push_back(slot);
  running_--;
  cv_sched_.notify_all();
  slot->cv.wait(lk, [&] { return slot->done; });
  // running_ was re-incremented on our behalf when the reply landed.
  return std::move(*slot->reply);
}

void SimNet::finish(std::shared_ptr<Pending> slot, Message reply) {
  {
    std::lock_guard lk(mu_);
    slot->reply = std::move(reply);
    slot->done = true;
    running_++;  // hand control to the resumed task
  }
  slot->cv.notify_all();
}

void SimNet::scheduler_loop() {
  std::unique_lock lk(mu_);
  for (;;) {
    cv_sched_.wait(lk, [&] {
      return stop_ ||
             (registered_ >= gate_ && running_ == 0 && !pending_.empty());
    });
    if (stop_) return;

    std::sort(pending_.begin(), pending_.end(),
              [](const auto& a, const auto& b) {
                return a->task_id < b->task_id;
              });
    size_t idx = chooser_->pick(pending_.size());
    auto slot = pending_[idx];
    pending_.erase(pending_.begin() + idx);
    steps_++;

    lk.unlock();
    // The handler runs exclusively here; its reply callback may fire now
    // or from a later handler execution (deferred snapshot replies).
    services_[slot->dest](slot->msg, [this, slot](Message reply) {
      finish(slot, std::move(reply));
    });
    lk.lock();
  }
}

size_t SimNet::steps() const {
  std::lock_guard lk(mu_);
  return steps_;
}

}  // namespace kvsql::wire
