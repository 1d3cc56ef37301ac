"""Entry point for the csdlab CLI application."""

if __name__ == '__main__':
    from csdlab.cli.main import main
    main()
