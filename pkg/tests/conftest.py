"""Shared fixtures: the running social-account example used across suites."""

from __future__ import annotations

import pytest

ACCOUNTS_DATA = """\
<http://people/david> <http://xmlns.com/foaf/0.1/account> <http://bank> .
<http://people/felix> <http://xmlns.com/foaf/0.1/account> <http://games> .
<http://bank> <http://xmlns.com/foaf/0.1/accountServiceHomepage> <http://bank/yourmoney> .
"""

# same data minus the accountServiceHomepage triple
ACCOUNTS_DATA_NO_HOMEPAGE = "\n".join(ACCOUNTS_DATA.splitlines()[:2]) + "\n"

ACCOUNTS_QUERY = """\
PREFIX foaf: <http://xmlns.com/foaf/0.1/>
SELECT *
WHERE {
  ?who foaf:account ?acc .
  OPTIONAL { ?acc foaf:accountServiceHomepage ?home }
}
"""


@pytest.fixture
def accounts_data() -> str:
    return ACCOUNTS_DATA


@pytest.fixture
def accounts_query() -> str:
    return ACCOUNTS_QUERY
