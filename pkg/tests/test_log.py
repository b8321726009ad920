import logging

from src.ppclab.log import configure, full_stack, logger


class TestLog:

    def test_configure_is_idempotent(self, monkeypatch):
        monkeypatch.setenv("PPCLAB_LOG_LEVEL", "warning")
        before = len(logger.handlers)
        assert configure() is logger
        assert logger.level == logging.WARNING
        configure("debug")
        assert logger.level == logging.DEBUG
        assert len(logger.handlers) == before
        configure("INFO")

    def test_stack_without_exception(self):
        stack = full_stack()
        assert "test_stack_without_exception" in stack
        assert "in full_stack" not in stack

    def test_stack_names_the_handled_exception(self):
        def fail():
            raise ValueError("bad grid")

        try:
            fail()
        except ValueError:
            stack = full_stack()
        assert stack.startswith("Traceback (most recent call last):")
        assert "test_stack_names_the_handled_exception" in stack
        assert "in fail" in stack
        assert stack.rstrip().endswith("ValueError: bad grid")
