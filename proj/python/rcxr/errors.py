class RcxrError(RuntimeError):
    def __init__(self, kind, message, exit_code):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message
        self.exit_code = exit_code
