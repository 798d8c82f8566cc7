class FamilyHelper:
    # Base class for the instance families the CLI and the bench runner can generate.

    @staticmethod
    def name():
        # Name used on the command line and in bench suites.
        return ""

    @staticmethod
    def defaults():
        # Default generator parameters.
        return {}

    @staticmethod
    def randomized():
        # Whether different seeds give different instances.
        return False

    @staticmethod
    def generate(seed, **params):
        raise NotImplementedError
