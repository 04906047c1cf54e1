#include "spanboot/external_scorer.hpp"

#include "spanboot/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <csignal>
#include <cstring>

#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace spanboot
{

ExternalScorer::ExternalScorer(std::string command, View view, std::chrono::milliseconds timeout)
  : command_(std::move(command)), view_(view), timeout_(timeout)
{
  if (command_.empty())
    throw Error(ErrorKind::InvalidConfig, "external scorer command is empty");
  if (timeout_.count() <= 0)
    throw Error(ErrorKind::InvalidConfig, "external scorer timeout must be positive");

  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0)
    throw Error(ErrorKind::ExternalScorer, std::string("socketpair: ") + std::strerror(errno));

  const pid_t pid = ::fork();
  if (pid < 0)
  {
    ::close(fds[0]);
    ::close(fds[1]);
    throw Error(ErrorKind::ExternalScorer, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0)
  {
    // dup2 clears CLOEXEC on the new descriptors.
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  socket_ = fds[0];
  pid_ = pid;
}

ExternalScorer::~ExternalScorer()
{
  shutdown();
}

void ExternalScorer::shutdown() noexcept
{
  if (socket_ >= 0)
  {
    ::close(socket_);
    socket_ = -1;
  }
  if (pid_ > 0)
  {
    int status = 0;
    // Give a well-behaved child a moment to exit on EOF before killing it.
    for (int attempt = 0; attempt < 20; ++attempt)
    {
      if (::waitpid(pid_, &status, WNOHANG) == pid_)
      {
        pid_ = -1;
        return;
      }
      ::usleep(5000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string ExternalScorer::read_line() const
{
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;)
  {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos)
    {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      return line;
    }
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0)
      throw Error(ErrorKind::Timeout, "external scorer did not answer within " + std::to_string(timeout_.count()) + " ms");
    pollfd pfd{socket_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left));
    if (ready < 0)
    {
      if (errno == EINTR)
        continue;
      throw Error(ErrorKind::ExternalScorer, std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0)
      continue;
    char chunk[4096];
    const ssize_t got = ::recv(socket_, chunk, sizeof chunk, 0);
    if (got < 0)
    {
      if (errno == EINTR)
        continue;
      throw Error(ErrorKind::ExternalScorer, std::string("recv: ") + std::strerror(errno));
    }
    if (got == 0)
      throw Error(ErrorKind::ExternalScorer, "external scorer closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

double ExternalScorer::score(const Sentence& sentence, Span span) const
{
  if (broken_)
    throw Error(ErrorKind::ExternalScorer, "external scorer is out of sync after an earlier failure");
  if (!sentence.valid(span))
    throw Error(ErrorKind::Format, "span out of range for sentence " + std::to_string(sentence.id));

  nlohmann::ordered_json request;
  request["view"] = to_string(view_);
  request["tokens"] = sentence.tokens;
  request["i"] = span.i;
  request["j"] = span.j;
  const std::string line = request.dump() + "\n";

  try
  {
    std::size_t sent = 0;
    while (sent < line.size())
    {
      const ssize_t n = ::send(socket_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n < 0)
      {
        if (errno == EINTR)
          continue;
        throw Error(ErrorKind::ExternalScorer, std::string("send: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }

    const std::string reply = read_line();
    const char* first = reply.data();
    const char* last = reply.data() + reply.size();
    while (first < last && (*first == ' ' || *first == '\t'))
      ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t'))
      --last;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || end != last || first == last)
      throw Error(ErrorKind::ExternalScorer, "non-numeric response: '" + reply + "'");
    if (!std::isfinite(value) || value < 0.0 || value > 1.0)
      throw Error(ErrorKind::ExternalScorer, "response outside [0, 1]: " + reply);
    return value;
  }
  catch (const Error&)
  {
    broken_ = true;
    throw;
  }
}

} // namespace spanboot
