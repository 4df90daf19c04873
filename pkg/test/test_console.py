from pyqkt.console import LOG_COLORS, LOG_FORMAT, configure_console


class TestConfigureConsole:
    def teardown_method(self):
        configure_console()

    def test_default(self):
        settings = configure_console()
        assert settings["console_view"] is True
        assert settings["debug_view"] is False
        assert settings["save_log"]["status"] is False
        assert settings["format"] == LOG_FORMAT
        assert settings["colors"] is LOG_COLORS

    def test_verbose(self):
        assert configure_console(verbose=True)["debug_view"] is True

    def test_quiet_wins_over_verbose(self):
        settings = configure_console(verbose=True, quiet=True)
        assert settings["console_view"] is False
        assert settings["debug_view"] is False

    def test_log_file(self, tmp_path):
        log = str(tmp_path / "run.log")
        settings = configure_console(log_file=log)
        assert settings["save_log"] == {"status": True, "filename": log, "filemode": "a"}

    def test_format_tokens(self):
        for token in ("<%TYPE>", "<%FILE&%FUNC>", "<%MESSAGE>"):
            assert token in LOG_FORMAT
        assert set(LOG_COLORS["type"]) >= {"info", "success", "warning", "error", "debug"}
