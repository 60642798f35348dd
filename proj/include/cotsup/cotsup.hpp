#pragma once

#include "cotsup/core.hpp"
#include "cotsup/decimal.hpp"
#include "cotsup/expr.hpp"
#include "cotsup/instance.hpp"
#include "cotsup/oracle.hpp"
#include "cotsup/task_suite.hpp"
#include "cotsup/templates.hpp"
#include "cotsup/prompt.hpp"
#include "cotsup/scripted_agent.hpp"
#include "cotsup/http_agent.hpp"
#include "cotsup/grader.hpp"
#include "cotsup/theory.hpp"
#include "cotsup/runner.hpp"
