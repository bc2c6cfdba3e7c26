package com.minipet.pets;

import com.minipet.owners.Owner;

public class Pet {
    private String name;
    private Owner owner;
    private PetType type;

    public Pet(String name, PetType type) {
        this.name = name;
        this.type = type;
    }

    public String getName() {
        return name;
    }

    public Owner getOwner() {
        return owner;
    }

    public void setOwner(Owner owner) {
        this.owner = owner;
    }
}
