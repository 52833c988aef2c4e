# Copyright 2026 The Privaudit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Membership-inference leakage auditing toolkit.

The heavy lifting lives in the C++ extension module; this package re-exports
its surface: trade-off/GDP accounting, synthetic data generation, network
training with optional DP-SGD, the four membership-inference scorers,
goal-driven threshold selection, leakage metrics and the experiment harness.
"""

from privaudit._core import *  # noqa: F401,F403
from privaudit._core import __doc__ as _core_doc

__version__ = "0.1.0"
__doc__ = _core_doc
