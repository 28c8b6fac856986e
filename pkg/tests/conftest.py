import pytest

from munchkin.ir import parse_program

CHAIN_TEXT = """\
program chain

func main()
block entry:
  call f()
  ret

func f()
block entry:
  call g()
  ret

func g()
block entry:
  ret
"""


@pytest.fixture
def chain_program():
    """main calls f calls g, one block each."""
    return parse_program(CHAIN_TEXT)
